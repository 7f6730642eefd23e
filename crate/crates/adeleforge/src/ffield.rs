//! Obstruction characters over F_q(t): unramified constant-extension classes
//! and tame Kummer covers, with the tame symbol supplying the local pairing
//! and Weil reciprocity the product-formula oracle. Wild characters are out
//! of scope, so every survival verdict is bounded by the scanned family.

use crate::fq::{
    ff_val_unit, monic_irreducibles, poly_is_zero, ratfn_support, residue_norm, FfPlace, FqCtx,
    RatFn,
};
use crate::qmodz::QmodZ;
use crate::rat::ArithError;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error, PartialEq, Clone)]
pub enum FfError {
    #[error("Kummer cover order {0} must divide q - 1 = {1}")]
    BadKummerOrder(u64, u64),
    #[error("value required at place {0} but only a default unit is known")]
    InsufficientData(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The implemented character family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FfCharacter {
    /// Pullback from the degree-n constant-field extension: the local
    /// invariant is v_P(x)·deg(P)/n.
    ConstantExt(u64),
    /// Tame Kummer cover of order N | q-1 attached to f: the local invariant
    /// is the image of Norm(tame symbol (x, f)_P)^((q-1)/N) in (1/N)Z/Z.
    KummerCover { n: u64, f: RatFn },
}

impl FfCharacter {
    pub fn describe(&self, ctx: &FqCtx) -> String {
        match self {
            FfCharacter::ConstantExt(n) => format!("constant extension of degree {n}"),
            FfCharacter::KummerCover { n, f } => {
                format!("Kummer cover of order {n} attached to {}", f.to_string(ctx))
            }
        }
    }
}

/// (-1)^{v(x)v(f)} x^{v(f)} / f^{v(x)} evaluated at P: a unit there, with a
/// well-defined residue in the residue field.
pub fn tame_symbol(
    ctx: &FqCtx,
    x: &RatFn,
    f: &RatFn,
    place: &FfPlace,
) -> Result<Vec<u64>, ArithError> {
    if poly_is_zero(&x.num) || poly_is_zero(&f.num) {
        return Err(ArithError::ZeroInput);
    }
    let (a, _) = ff_val_unit(ctx, x, place)?;
    let (b, _) = ff_val_unit(ctx, f, place)?;
    let mut y = x.pow(ctx, b).mul(ctx, &f.pow(ctx, -a));
    if (a * b) % 2 != 0 {
        let minus_one = ctx.neg(1);
        y = y.mul(ctx, &RatFn::constant(minus_one).expect("nonzero"));
    }
    let (v, res) = ff_val_unit(ctx, &y, place)?;
    debug_assert_eq!(v, 0, "tame symbol is a unit at the place");
    Ok(res)
}

/// Local invariant of the character at P evaluated on x.
pub fn ff_local_invariant(
    ctx: &FqCtx,
    chi: &FfCharacter,
    place: &FfPlace,
    x: &RatFn,
) -> Result<QmodZ, FfError> {
    match chi {
        FfCharacter::ConstantExt(n) => {
            let (v, _) = ff_val_unit(ctx, x, place)?;
            Ok(QmodZ::frac(v * place.degree() as i64, *n))
        }
        FfCharacter::KummerCover { n, f } => {
            if (ctx.q - 1) % n != 0 {
                return Err(FfError::BadKummerOrder(*n, ctx.q - 1));
            }
            let sym = tame_symbol(ctx, x, f, place)?;
            let norm = residue_norm(ctx, place, &sym)?;
            let powered = ctx.pow(norm, (ctx.q - 1) / n);
            // powered lies in mu_N; identify with (1/N)Z/Z via the fixed
            // generator convention
            let dlog = ctx.dlog(powered)?;
            let step = (ctx.q - 1) / n;
            debug_assert_eq!(dlog % step, 0, "power lands in mu_N");
            Ok(QmodZ::frac((dlog / step) as i64, *n))
        }
    }
}

/// Sum of local invariants over every place in the supports of x, f and the
/// degree place. Zero on all inputs is Weil reciprocity (Kummer case) and
/// vanishing of principal-divisor degrees (constant case).
pub fn ff_global_sum(ctx: &FqCtx, chi: &FfCharacter, x: &RatFn) -> Result<QmodZ, FfError> {
    let mut places: BTreeSet<FfPlace> = [FfPlace::Infinity].into();
    for (pl, _) in ratfn_support(ctx, x) {
        places.insert(pl);
    }
    if let FfCharacter::KummerCover { f, .. } = chi {
        for (pl, _) in ratfn_support(ctx, f) {
            places.insert(pl);
        }
    }
    let mut acc = QmodZ::zero();
    for pl in &places {
        acc = acc.add(&ff_local_invariant(ctx, chi, pl, x)?);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// adelic data and the survivor scan
// ---------------------------------------------------------------------------

/// Finite description of adelic data on G_m^d over F_q(t): a global default
/// value per coordinate (the component at every unlisted place) plus explicit
/// overrides, all exact rational functions.
#[derive(Debug, Clone, PartialEq)]
pub struct FfAdelicPoint {
    pub rank: usize,
    pub default: Vec<RatFn>,
    pub overrides: BTreeMap<FfPlace, Vec<RatFn>>,
    pub excluded: BTreeSet<FfPlace>,
}

impl FfAdelicPoint {
    pub fn diagonal(values: Vec<RatFn>) -> Self {
        FfAdelicPoint {
            rank: values.len(),
            default: values,
            overrides: BTreeMap::new(),
            excluded: BTreeSet::new(),
        }
    }

    pub fn component(&self, place: &FfPlace) -> Option<&Vec<RatFn>> {
        if self.excluded.contains(place) {
            return None;
        }
        Some(self.overrides.get(place).unwrap_or(&self.default))
    }
}

/// Character-relevant places for one coordinate of the point.
fn relevant_places(
    ctx: &FqCtx,
    chi: &FfCharacter,
    x: &FfAdelicPoint,
    coord: usize,
) -> BTreeSet<FfPlace> {
    let mut places: BTreeSet<FfPlace> = [FfPlace::Infinity].into();
    for (pl, _) in ratfn_support(ctx, &x.default[coord]) {
        places.insert(pl);
    }
    for (pl, coords) in &x.overrides {
        places.insert(pl.clone());
        for (c, _) in ratfn_support(ctx, &coords[coord]) {
            places.insert(c);
        }
    }
    if let FfCharacter::KummerCover { f, .. } = chi {
        for (pl, _) in ratfn_support(ctx, f) {
            places.insert(pl);
        }
    }
    places
}

/// Pairing of one character placed on one coordinate against the data, summed
/// over places outside the excluded set.
pub fn ff_pair_coordinate(
    ctx: &FqCtx,
    chi: &FfCharacter,
    x: &FfAdelicPoint,
    coord: usize,
) -> Result<QmodZ, FfError> {
    let mut acc = QmodZ::zero();
    for pl in relevant_places(ctx, chi, x, coord) {
        if x.excluded.contains(&pl) {
            continue;
        }
        let value = &x.component(&pl).expect("not excluded")[coord];
        acc = acc.add(&ff_local_invariant(ctx, chi, &pl, value)?);
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct FfBounds {
    /// constant extensions of degree 2..=n_max
    pub n_max: u64,
    /// extra Kummer attachments beyond the generator set
    pub extra_f: Vec<RatFn>,
}

impl Default for FfBounds {
    fn default() -> Self {
        FfBounds { n_max: 4, extra_f: Vec::new() }
    }
}

/// The scanned family, in deterministic order: constant extensions by degree,
/// then Kummer covers by (N, attachment) with attachments running over
/// t - a for a in F_q, then the irreducibles of degree 2, then extras.
pub fn character_family(ctx: &FqCtx, bounds: &FfBounds) -> Vec<FfCharacter> {
    let mut out = Vec::new();
    for n in 2..=bounds.n_max {
        out.push(FfCharacter::ConstantExt(n));
    }
    let mut attachments: Vec<RatFn> = Vec::new();
    for a in 0..ctx.q {
        let lin = vec![ctx.neg(a), 1];
        attachments.push(RatFn::from_poly(lin).expect("nonzero"));
    }
    for pi in monic_irreducibles(ctx, 2) {
        attachments.push(RatFn::from_poly(pi).expect("nonzero"));
    }
    attachments.extend(bounds.extra_f.iter().cloned());
    for n in 2..ctx.q {
        if (ctx.q - 1) % n != 0 {
            continue;
        }
        for f in &attachments {
            out.push(FfCharacter::KummerCover { n, f: f.clone() });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FfObstruction {
    pub character: FfCharacter,
    pub coordinate: usize,
    pub pairing: QmodZ,
}

#[derive(Debug, Clone)]
pub enum FfSurvivorVerdict {
    Obstructed(FfObstruction),
    SurvivesUpTo { characters_checked: usize },
}

/// Scan the finite family; the local-triviality filter keeps only characters
/// trivial on every completion at places of S, and the first obstruction in
/// the deterministic order wins.
pub fn ff_survives(
    ctx: &FqCtx,
    x: &FfAdelicPoint,
    s: &BTreeSet<FfPlace>,
    bounds: &FfBounds,
) -> Result<FfSurvivorVerdict, FfError> {
    let mut checked = 0;
    for chi in character_family(ctx, bounds) {
        if !s.iter().all(|pl| ff_locally_trivial(ctx, &chi, pl)) {
            continue;
        }
        for coord in (0..x.rank).rev() {
            checked += 1;
            let pairing = ff_pair_coordinate(ctx, &chi, x, coord)?;
            if !pairing.is_zero() {
                return Ok(FfSurvivorVerdict::Obstructed(FfObstruction {
                    character: chi,
                    coordinate: coord,
                    pairing,
                }));
            }
        }
    }
    Ok(FfSurvivorVerdict::SurvivesUpTo { characters_checked: checked })
}

/// Is the local invariant of chi identically zero at P?
pub fn ff_locally_trivial(ctx: &FqCtx, chi: &FfCharacter, place: &FfPlace) -> bool {
    match chi {
        // v·deg(P)/n ranges over deg(P)/n·Z
        FfCharacter::ConstantExt(n) => place.degree() as u64 % n == 0,
        FfCharacter::KummerCover { n, f } => {
            let (vf, _) = ff_val_unit(ctx, f, place).expect("f nonzero");
            if vf != 0 {
                // the symbol then depends on the residue of x
                return false;
            }
            // invariant is v_P(x) · dlog(Norm(f(P)))-class: trivial iff the
            // residue of f is an N-th power norm
            let (_, res) = ff_val_unit(ctx, f, place).expect("f nonzero");
            let norm = residue_norm(ctx, place, &res).expect("unit residue");
            let powered = ctx.pow(norm, (ctx.q - 1) / n);
            powered == 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fq::{poly_parse, FqCtx};
    use rand::{Rng, SeedableRng};

    fn ratfn(ctx: &FqCtx, num: &str, den: &str) -> RatFn {
        RatFn::new(ctx, poly_parse(ctx, num).unwrap(), poly_parse(ctx, den).unwrap()).unwrap()
    }

    #[test]
    fn tame_symbol_examples() {
        // (t, 1-t) at P=(t): the Steinberg instance evaluates to 1
        let ctx = FqCtx::new(3).unwrap();
        let t = ratfn(&ctx, "t", "1");
        let one_minus_t = ratfn(&ctx, "1 - t", "1");
        let p = FfPlace::finite(&ctx, vec![0, 1]).unwrap();
        assert_eq!(tame_symbol(&ctx, &t, &one_minus_t, &p).unwrap(), vec![1]);

        // (t, t) at P=(t): -1 in odd characteristic
        assert_eq!(tame_symbol(&ctx, &t, &t, &p).unwrap(), vec![2]);

        // (t, t+1) at P=(t+1) over F_2: residue of t at -1 is 1
        let ctx2 = FqCtx::new(2).unwrap();
        let t2 = ratfn(&ctx2, "t", "1");
        let t1 = ratfn(&ctx2, "t+1", "1");
        let p1 = FfPlace::finite(&ctx2, vec![1, 1]).unwrap();
        assert_eq!(tame_symbol(&ctx2, &t2, &t1, &p1).unwrap(), vec![1]);
    }

    #[test]
    fn local_invariant_examples() {
        // constant extension of degree 2 at P=(t) on x=t over F_3: 1/2
        let ctx = FqCtx::new(3).unwrap();
        let t = ratfn(&ctx, "t", "1");
        let p = FfPlace::finite(&ctx, vec![0, 1]).unwrap();
        let inv =
            ff_local_invariant(&ctx, &FfCharacter::ConstantExt(2), &p, &t).unwrap();
        assert_eq!(inv, QmodZ::frac(1, 2));

        // Kummer(2, t) at P=(t+1) on x=t+1 over F_3: t(-1) = 2 is a
        // non-square, invariant 1/2
        let p1 = FfPlace::finite(&ctx, vec![1, 1]).unwrap();
        let chi = FfCharacter::KummerCover { n: 2, f: t.clone() };
        let x = ratfn(&ctx, "t+1", "1");
        assert_eq!(ff_local_invariant(&ctx, &chi, &p1, &x).unwrap(), QmodZ::frac(1, 2));
    }

    #[test]
    fn weil_reciprocity_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for q in [3u64, 4, 5] {
            let ctx = FqCtx::new(q).unwrap();
            let random_fn = |rng: &mut rand_chacha::ChaCha8Rng| -> RatFn {
                loop {
                    let deg_n = rng.gen_range(1..=3usize);
                    let deg_d = rng.gen_range(0..=2usize);
                    let mut num: Vec<u64> = (0..=deg_n).map(|_| rng.gen_range(0..q)).collect();
                    let mut den: Vec<u64> = (0..=deg_d).map(|_| rng.gen_range(0..q)).collect();
                    *num.last_mut().unwrap() = 1 + rng.gen_range(0..q - 1);
                    *den.last_mut().unwrap() = 1;
                    if let Ok(f) = RatFn::new(&ctx, num, den) {
                        return f;
                    }
                }
            };
            for _ in 0..70 {
                let x = random_fn(&mut rng);
                let f = random_fn(&mut rng);
                for n in 2..q {
                    if (q - 1) % n != 0 {
                        continue;
                    }
                    let chi = FfCharacter::KummerCover { n, f: f.clone() };
                    let total = ff_global_sum(&ctx, &chi, &x).unwrap();
                    assert!(
                        total.is_zero(),
                        "Weil reciprocity fails over F_{q}: x={}, f={}, N={n}, sum={total}",
                        x.to_string(&ctx),
                        f.to_string(&ctx)
                    );
                }
                // degree reciprocity: principal divisors have degree zero
                for n in 2..=4 {
                    let chi = FfCharacter::ConstantExt(n);
                    assert!(ff_global_sum(&ctx, &chi, &x).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn survivor_examples() {
        let ctx = FqCtx::new(3).unwrap();
        // diagonal of an S-unit survives everything (reciprocity)
        let u = ratfn(&ctx, "t^2 + t", "1"); // t(t+1)
        let x = FfAdelicPoint::diagonal(vec![u]);
        match ff_survives(&ctx, &x, &BTreeSet::new(), &FfBounds::default()).unwrap() {
            FfSurvivorVerdict::SurvivesUpTo { .. } => {}
            v => panic!("expected survival, got {v:?}"),
        }

        // x = t at P=(t) only, 1 elsewhere: the degree of the would-be
        // divisor is 1, so the quadratic constant extension obstructs
        let mut x = FfAdelicPoint::diagonal(vec![RatFn::one()]);
        x.overrides.insert(
            FfPlace::finite(&ctx, vec![0, 1]).unwrap(),
            vec![ratfn(&ctx, "t", "1")],
        );
        match ff_survives(&ctx, &x, &BTreeSet::new(), &FfBounds::default()).unwrap() {
            FfSurvivorVerdict::Obstructed(ob) => {
                assert_eq!(ob.character, FfCharacter::ConstantExt(2));
                assert_eq!(ob.pairing, QmodZ::frac(1, 2));
            }
            v => panic!("expected obstruction, got {v:?}"),
        }
    }

    #[test]
    fn residue_deviant_is_kummer_obstructed() {
        // solution (2t, t+1) of u + w = 1 over F_3(t); shift the residue of
        // the second coordinate at P=(t) from 1 to 2: Kummer(2, t) sees it
        let ctx = FqCtx::new(3).unwrap();
        let u = ratfn(&ctx, "2t", "1");
        let w = ratfn(&ctx, "t+1", "1");
        assert_eq!(u.add(&ctx, &w).unwrap(), RatFn::one());
        let honest = FfAdelicPoint::diagonal(vec![u.clone(), w.clone()]);
        match ff_survives(&ctx, &honest, &BTreeSet::new(), &FfBounds::default()).unwrap() {
            FfSurvivorVerdict::SurvivesUpTo { .. } => {}
            v => panic!("expected survival, got {v:?}"),
        }

        let mut deviant = honest.clone();
        // 2t+2 has residue 2 at t=0 instead of 1
        deviant.overrides.insert(
            FfPlace::finite(&ctx, vec![0, 1]).unwrap(),
            vec![u.clone(), ratfn(&ctx, "2t+2", "1")],
        );
        match ff_survives(&ctx, &deviant, &BTreeSet::new(), &FfBounds::default()).unwrap() {
            FfSurvivorVerdict::Obstructed(ob) => {
                assert!(matches!(ob.character, FfCharacter::KummerCover { n: 2, .. }));
                assert_eq!(ob.coordinate, 1);
            }
            v => panic!("expected a Kummer obstruction, got {v:?}"),
        }
    }

    #[test]
    fn f2_curve_solutions_survive() {
        // u + w = 1 over F_2(t): the diagonal of each bounded solution survives
        let ctx = FqCtx::new(2).unwrap();
        let s = [
            FfPlace::finite(&ctx, vec![0, 1]).unwrap(),
            FfPlace::finite(&ctx, vec![1, 1]).unwrap(),
            FfPlace::Infinity,
        ];
        let one = RatFn::one();
        let sols = crate::sunits::ff_solve_unit_equation(&ctx, &s, 3, &one, &one).unwrap();
        assert!(!sols.pairs.is_empty());
        for (u, w) in &sols.pairs {
            let x = FfAdelicPoint::diagonal(vec![u.clone(), w.clone()]);
            match ff_survives(&ctx, &x, &BTreeSet::new(), &FfBounds::default()).unwrap() {
                FfSurvivorVerdict::SurvivesUpTo { .. } => {}
                v => panic!("solution ({}, {}) obstructed: {v:?}", u.to_string(&ctx), w.to_string(&ctx)),
            }
        }
        // valuation deviant over F_2: constant-extension obstruction
        let (u, w) = sols.pairs[0].clone();
        let mut deviant = FfAdelicPoint::diagonal(vec![u.clone(), w]);
        let p = FfPlace::finite(&ctx, vec![1, 1]).unwrap();
        let shifted = u.mul(&ctx, &ratfn_t_plus_one(&ctx));
        deviant.overrides.insert(p, vec![shifted, RatFn::one()]);
        match ff_survives(&ctx, &deviant, &BTreeSet::new(), &FfBounds::default()).unwrap() {
            FfSurvivorVerdict::Obstructed(ob) => {
                assert!(matches!(ob.character, FfCharacter::ConstantExt(_)));
            }
            v => panic!("expected obstruction, got {v:?}"),
        }
    }

    fn ratfn_t_plus_one(ctx: &FqCtx) -> RatFn {
        RatFn::new(ctx, poly_parse(ctx, "t+1").unwrap(), vec![1]).unwrap()
    }

    #[test]
    fn locally_trivial_filter() {
        let ctx = FqCtx::new(3).unwrap();
        let p_deg1 = FfPlace::finite(&ctx, vec![0, 1]).unwrap();
        let p_deg2 = FfPlace::finite(&ctx, vec![1, 0, 1]).unwrap(); // t^2+1 irreducible over F_3
        assert!(!ff_locally_trivial(&ctx, &FfCharacter::ConstantExt(2), &p_deg1));
        assert!(ff_locally_trivial(&ctx, &FfCharacter::ConstantExt(2), &p_deg2));
    }
}
