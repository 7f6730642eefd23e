//! Split tori over Q, adelic points at finite precision, the character
//! pairing, bounded survivor searches, and rational-point matching.

use crate::padic::{LocalValue, RealSign};
use crate::place::Place;
use crate::qmodz::QmodZ;
use crate::rat::{height, support, ArithError, Rat};
use crate::reciprocity::{
    enumerate_characters, is_in_b1s, local_invariant, DirichletCharacter, ReciprocityError,
};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitTorus {
    pub rank: usize,
}

impl SplitTorus {
    pub fn new(rank: usize) -> Self {
        assert!(rank >= 1);
        SplitTorus { rank }
    }
}

/// One character per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterTuple(pub Vec<DirichletCharacter>);

impl CharacterTuple {
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn trivial(rank: usize) -> Self {
        CharacterTuple(vec![DirichletCharacter::trivial(); rank])
    }

    pub fn max_conductor(&self) -> u64 {
        self.0.iter().map(|c| c.conductor()).max().unwrap_or(1)
    }
}

/// What an unlisted place carries.
#[derive(Debug, Clone, PartialEq)]
pub enum DefaultComponent {
    /// Valuation zero in every coordinate, residues unspecified.
    Unit,
    /// The diagonal image of a fixed rational vector (its support must be
    /// contained in the explicit places together with S).
    Diagonal(Vec<Rat>),
}

/// Finite-precision description of a point of T(A_Q^S): explicit local data
/// at finitely many places, a default rule elsewhere, and an excluded set S
/// at which components are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdelicPoint {
    pub torus: SplitTorus,
    pub explicit: BTreeMap<Place, Vec<LocalValue>>,
    pub default: DefaultComponent,
    pub excluded: BTreeSet<Place>,
}

#[derive(Debug, thiserror::Error, PartialEq, Clone)]
pub enum ToruslabError {
    #[error("explicit data at excluded place {0}")]
    ExplicitAtExcluded(String),
    #[error("coordinate count at {0} does not match the torus rank")]
    RankMismatch(String),
    #[error("diagonal default has support at the unlisted place {0}")]
    DiagonalSupportLeak(u64),
    #[error("insufficient precision at place {place}, coordinate {coordinate}, testing character of conductor {conductor}")]
    InsufficientPrecision { place: String, coordinate: usize, conductor: u64 },
    #[error("place {0} is relevant to the character but excluded; request the S-restricted pairing")]
    RelevantPlaceExcluded(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl AdelicPoint {
    pub fn new(
        torus: SplitTorus,
        explicit: BTreeMap<Place, Vec<LocalValue>>,
        default: DefaultComponent,
        excluded: BTreeSet<Place>,
    ) -> Result<Self, ToruslabError> {
        for (pl, coords) in &explicit {
            if excluded.contains(pl) {
                return Err(ToruslabError::ExplicitAtExcluded(pl.to_string()));
            }
            if coords.len() != torus.rank {
                return Err(ToruslabError::RankMismatch(pl.to_string()));
            }
        }
        if let DefaultComponent::Diagonal(q) = &default {
            if q.len() != torus.rank {
                return Err(ToruslabError::RankMismatch("default".into()));
            }
            for qi in q {
                for (p, _) in support(qi) {
                    let pl = Place::Prime(p);
                    if !explicit.contains_key(&pl) && !excluded.contains(&pl) {
                        return Err(ToruslabError::DiagonalSupportLeak(p));
                    }
                }
            }
        }
        Ok(AdelicPoint { torus, explicit, default, excluded })
    }

    /// The diagonal image of a rational vector, off the excluded set. Support
    /// places become explicit exact components.
    pub fn diagonal(
        q: &[Rat],
        excluded: BTreeSet<Place>,
    ) -> Result<Self, ToruslabError> {
        let torus = SplitTorus::new(q.len());
        let mut explicit: BTreeMap<Place, Vec<LocalValue>> = BTreeMap::new();
        let mut places: BTreeSet<Place> = BTreeSet::new();
        for qi in q {
            for (p, _) in support(qi) {
                places.insert(Place::Prime(p));
            }
        }
        if !excluded.contains(&Place::RealInfinity) {
            places.insert(Place::RealInfinity);
        }
        for pl in places {
            if excluded.contains(&pl) {
                continue;
            }
            explicit.insert(pl, q.iter().map(|qi| LocalValue::Exact(qi.clone())).collect());
        }
        AdelicPoint::new(torus, explicit, DefaultComponent::Diagonal(q.to_vec()), excluded)
    }

    /// The component at a place, if determined by the description.
    pub fn component(&self, pl: &Place) -> Option<Vec<LocalValue>> {
        if self.excluded.contains(pl) {
            return None;
        }
        if let Some(c) = self.explicit.get(pl) {
            return Some(c.clone());
        }
        match &self.default {
            DefaultComponent::Diagonal(q) => {
                Some(q.iter().map(|qi| LocalValue::Exact(qi.clone())).collect())
            }
            DefaultComponent::Unit => None,
        }
    }

    pub fn rank(&self) -> usize {
        self.torus.rank
    }
}

/// Places that can contribute to the pairing of x against the tuple: the
/// conductor primes of every coordinate character, every explicit place, the
/// support of the diagonal default, and the real place.
fn relevant_places(x: &AdelicPoint, tuple: &CharacterTuple) -> BTreeSet<Place> {
    let mut places: BTreeSet<Place> = BTreeSet::new();
    for chi in &tuple.0 {
        for (p, _) in crate::rat::factor_u64(chi.modulus().max(1)) {
            places.insert(Place::Prime(p));
        }
    }
    for pl in x.explicit.keys() {
        places.insert(pl.clone());
    }
    if let DefaultComponent::Diagonal(q) = &x.default {
        for qi in q {
            for (p, _) in support(qi) {
                places.insert(Place::Prime(p));
            }
        }
    }
    places.insert(Place::RealInfinity);
    places
}

/// One local summand of the pairing at a determined component.
fn local_pair(
    tuple: &CharacterTuple,
    pl: &Place,
    coords: &[LocalValue],
) -> Result<QmodZ, ToruslabError> {
    let mut acc = QmodZ::zero();
    for (j, (chi, xv)) in tuple.0.iter().zip(coords).enumerate() {
        let inv = local_invariant(chi, pl, xv).map_err(|e| match e {
            ReciprocityError::InsufficientPrecision { .. } | ReciprocityError::UnknownSign => {
                ToruslabError::InsufficientPrecision {
                    place: pl.to_string(),
                    coordinate: j,
                    conductor: chi.conductor(),
                }
            }
            ReciprocityError::Arith(a) => ToruslabError::Arith(a),
            ReciprocityError::PlaceMismatch(s) => {
                ToruslabError::Arith(ArithError::BadLiteral(s))
            }
        })?;
        acc = acc.add(&inv);
    }
    Ok(acc)
}

/// The pairing sum over places outside the excluded set. With
/// `s_restricted = false` any character-relevant place inside the excluded
/// set is an error rather than silently dropped.
pub fn bm_pair(
    x: &AdelicPoint,
    tuple: &CharacterTuple,
    s_restricted: bool,
) -> Result<QmodZ, ToruslabError> {
    assert_eq!(tuple.rank(), x.rank(), "tuple rank must match the torus");
    let mut acc = QmodZ::zero();
    for pl in relevant_places(x, tuple) {
        if x.excluded.contains(&pl) {
            if s_restricted {
                continue;
            }
            // a conductor prime (or sign-relevant real place) with no component
            let relevant = match &pl {
                Place::Prime(p) => tuple.0.iter().any(|c| c.modulus() % p == 0),
                Place::RealInfinity => tuple.0.iter().any(|c| !c.is_even()),
                _ => false,
            };
            if relevant {
                return Err(ToruslabError::RelevantPlaceExcluded(pl.to_string()));
            }
            continue;
        }
        match x.component(&pl) {
            Some(coords) => acc = acc.add(&local_pair(tuple, &pl, &coords)?),
            None => {
                // unit with unspecified residue: contributes zero unless some
                // character is ramified there (or odd, at the real place)
                match &pl {
                    Place::Prime(p) => {
                        for (j, chi) in tuple.0.iter().enumerate() {
                            if chi.modulus() % p == 0 {
                                return Err(ToruslabError::InsufficientPrecision {
                                    place: pl.to_string(),
                                    coordinate: j,
                                    conductor: chi.conductor(),
                                });
                            }
                        }
                    }
                    Place::RealInfinity => {
                        for (j, chi) in tuple.0.iter().enumerate() {
                            if !chi.is_even() {
                                return Err(ToruslabError::InsufficientPrecision {
                                    place: pl.to_string(),
                                    coordinate: j,
                                    conductor: chi.conductor(),
                                });
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(acc)
}

/// Certificate of a failed survivor search: the first obstructing tuple in
/// the deterministic order, with its nonzero pairing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstruction {
    pub tuple: CharacterTuple,
    pub pairing: QmodZ,
    /// index of the nontrivial coordinate for single-component certificates
    pub coordinate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurvivorVerdict {
    Obstructed(Obstruction),
    SurvivesUpTo { conductor_bound: u64, tuples_checked: usize },
}

/// Candidate single-component tuples in the order induced by the full
/// deterministic tuple order (max conductor, then lexicographic with the
/// trivial character smallest). Additivity of the pairing makes the minimal
/// obstructing tuple single-component, so scanning these is exhaustive.
pub fn b1s_candidates(
    rank: usize,
    s: &BTreeSet<Place>,
    conductor_bound: u64,
) -> Vec<(usize, DirichletCharacter)> {
    let chars: Vec<DirichletCharacter> = enumerate_characters(conductor_bound)
        .into_iter()
        .filter(|c| !c.is_trivial() && is_in_b1s(c, s))
        .collect();
    let mut out = Vec::new();
    let mut by_conductor: BTreeMap<u64, Vec<DirichletCharacter>> = BTreeMap::new();
    for c in chars {
        by_conductor.entry(c.conductor()).or_default().push(c);
    }
    for (_, group) in by_conductor {
        for j in (0..rank).rev() {
            for c in &group {
                out.push((j, c.clone()));
            }
        }
    }
    out
}

fn thread_cap() -> usize {
    std::env::var("ADELEFORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
        .min(16)
}

/// Scan all character tuples with components in B_{1,S} of conductor at most
/// M; the first obstruction in deterministic order wins. The scan may run on
/// several threads; the returned certificate is the global order minimum.
pub fn survives(
    x: &AdelicPoint,
    s: &BTreeSet<Place>,
    conductor_bound: u64,
) -> Result<SurvivorVerdict, ToruslabError> {
    let candidates = b1s_candidates(x.rank(), s, conductor_bound);
    let check = |idx: usize| -> Result<Option<(usize, Obstruction)>, ToruslabError> {
        let (j, chi) = &candidates[idx];
        let mut comps = vec![DirichletCharacter::trivial(); x.rank()];
        comps[*j] = chi.clone();
        let tuple = CharacterTuple(comps);
        let pairing = bm_pair(x, &tuple, true)?;
        if pairing.is_zero() {
            Ok(None)
        } else {
            Ok(Some((idx, Obstruction { tuple, pairing, coordinate: *j })))
        }
    };

    let cap = thread_cap();
    let first = if cap <= 1 || candidates.len() < 32 {
        let mut found = None;
        for i in 0..candidates.len() {
            if let Some(hit) = check(i)? {
                found = Some(hit);
                break;
            }
        }
        found
    } else {
        let chunk = candidates.len().div_ceil(cap);
        let results: Vec<Result<Option<(usize, Obstruction)>, ToruslabError>> =
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for c in 0..cap {
                    let lo = c * chunk;
                    let hi = ((c + 1) * chunk).min(candidates.len());
                    let check = &check;
                    handles.push(scope.spawn(move || {
                        for i in lo..hi {
                            match check(i) {
                                Ok(Some(hit)) => return Ok(Some(hit)),
                                Ok(None) => {}
                                Err(e) => return Err(e),
                            }
                        }
                        Ok(None)
                    }));
                }
                handles.into_iter().map(|h| h.join().expect("scan thread")).collect()
            });
        let mut best: Option<(usize, Obstruction)> = None;
        for r in results {
            if let Some((idx, ob)) = r? {
                if best.as_ref().map(|(b, _)| idx < *b).unwrap_or(true) {
                    best = Some((idx, ob));
                }
            }
        }
        best
    };

    Ok(match first {
        Some((_, ob)) => SurvivorVerdict::Obstructed(ob),
        None => SurvivorVerdict::SurvivesUpTo {
            conductor_bound,
            tuples_checked: candidates.len(),
        },
    })
}

/// All rationals of multiplicative height at most H, nonzero, sorted.
pub fn rationals_of_height(h: u64) -> Vec<Rat> {
    let mut out = Vec::new();
    for d in 1..=h as i64 {
        for n in -(h as i64)..=(h as i64) {
            if n == 0 {
                continue;
            }
            if num_integer::Integer::gcd(&n, &d) != 1 {
                continue;
            }
            out.push(Rat::new(BigInt::from(n), BigInt::from(d)));
        }
    }
    out.sort();
    out
}

/// Is the rational vector consistent with every determined datum of x?
/// Unlisted finite places demand unit coordinates (or agreement with the
/// diagonal default); excluded places impose nothing.
pub fn consistent_with(x: &AdelicPoint, q: &[Rat]) -> bool {
    if q.len() != x.rank() || q.iter().any(|c| c.is_zero()) {
        return false;
    }
    // explicit places
    for (pl, coords) in &x.explicit {
        match pl {
            Place::Prime(p) => {
                for (qi, xv) in q.iter().zip(coords) {
                    match xv {
                        LocalValue::Exact(r) => {
                            if r != qi {
                                return false;
                            }
                        }
                        LocalValue::Approx(a) => {
                            if a.prime() != *p || !a.contains(qi) {
                                return false;
                            }
                        }
                        LocalValue::Real(_) => return false,
                    }
                }
            }
            Place::RealInfinity => {
                for (qi, xv) in q.iter().zip(coords) {
                    match xv.real_sign() {
                        Ok(sig) => {
                            let want = if qi.is_negative() {
                                RealSign::Negative
                            } else {
                                RealSign::Positive
                            };
                            if sig != want {
                                return false;
                            }
                        }
                        Err(_) => return false,
                    }
                }
            }
            _ => return false,
        }
    }
    // default rule at unlisted places
    match &x.default {
        DefaultComponent::Unit => {
            for qi in q {
                for (p, _) in support(qi) {
                    let pl = Place::Prime(p);
                    if !x.explicit.contains_key(&pl) && !x.excluded.contains(&pl) {
                        return false;
                    }
                }
            }
        }
        DefaultComponent::Diagonal(diag) => {
            // the component at every unlisted place IS diag; q must coincide
            // with diag wherever some unlisted place could tell them apart,
            // i.e. exactly when q = diag (two distinct rationals differ at
            // almost all places)
            if q != diag {
                return false;
            }
        }
    }
    true
}

/// All rational vectors of height <= H consistent with x, in lexicographic
/// order. An empty answer is meaningful (contradictory local data).
pub fn match_rational(x: &AdelicPoint, height_bound: u64) -> Vec<Vec<Rat>> {
    let base = rationals_of_height(height_bound);
    let mut out: Vec<Vec<Rat>> = Vec::new();
    let rank = x.rank();
    let mut idx = vec![0usize; rank];
    'outer: loop {
        let q: Vec<Rat> = idx.iter().map(|&i| base[i].clone()).collect();
        if q.iter().all(|c| height(c) <= num_bigint::BigUint::from(height_bound))
            && consistent_with(x, &q)
        {
            out.push(q);
        }
        let mut k = 0;
        loop {
            if k == rank {
                break 'outer;
            }
            idx[k] += 1;
            if idx[k] < base.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    out.sort();
    out
}

/// Multiplicative height of a vector: the max over coordinates.
pub fn vector_height(q: &[Rat]) -> u64 {
    q.iter()
        .map(|c| height(c).to_u64().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(1)
}

pub fn s_inf() -> BTreeSet<Place> {
    [Place::RealInfinity].into()
}

pub fn s_of(primes: &[u64]) -> BTreeSet<Place> {
    let mut s = s_inf();
    for &p in primes {
        s.insert(Place::Prime(p));
    }
    s
}
