//! Serialization boundary: every document the CLI reads or writes lives here
//! as a serde struct with all numerics spelled as exact strings, plus the
//! conversions into the working types. Field order is fixed so equal inputs
//! produce byte-identical documents.

use crate::curves::{CurveAdelicData, ProjPoint, PuncturedLine, TorusEmbedding};
use crate::ffield::{FfAdelicPoint, FfCharacter};
use crate::fq::{poly_parse, poly_to_string, FfPlace, FqCtx, RatFn};
use crate::models::{AffineModel, DilationRecord, ModelShape};
use crate::padic::{LocalValue, PAdicApprox, RealDatum, RealSign};
use crate::place::Place;
use crate::poly::{parse_poly, Poly};
use crate::qmodz::QmodZ;
use crate::rat::{format_rat, parse_rat, ArithError, Rat};
use crate::reciprocity::DirichletCharacter;
use crate::sieve::{ExclusionCertificate, ExclusionWitness, FiniteSubscheme, MembershipCertificate};
use crate::toruslab::{AdelicPoint, CharacterTuple, DefaultComponent, SplitTorus};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("bad document: {0}")]
    Bad(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

fn bad(msg: impl Into<String>) -> IoError {
    IoError::Bad(msg.into())
}

// ---------------------------------------------------------------------------
// characters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CharacterJson {
    pub modulus: u64,
    /// generators of the unit group with their images in Q/Z
    pub values: Vec<(u64, String)>,
}

pub fn character_to_json(chi: &DirichletCharacter) -> CharacterJson {
    CharacterJson {
        modulus: chi.modulus(),
        values: chi
            .generator_images()
            .into_iter()
            .map(|(g, v)| (g, v.to_string()))
            .collect(),
    }
}

pub fn character_from_json(doc: &CharacterJson) -> Result<DirichletCharacter, IoError> {
    let gens = crate::reciprocity::unit_group_generators(doc.modulus);
    if gens.len() != doc.values.len() {
        return Err(bad(format!(
            "modulus {} needs images for {} generators, got {}",
            doc.modulus,
            gens.len(),
            doc.values.len()
        )));
    }
    let mut exps = Vec::new();
    for ((g, ord), (gj, img)) in gens.iter().zip(&doc.values) {
        if g != gj {
            return Err(bad(format!("expected canonical generator {g}, got {gj}")));
        }
        let v = QmodZ::parse(img)?;
        // image k/ord
        let scaled = v.as_rat() * Rat::from_integer((*ord).into());
        if !scaled.is_integer() {
            return Err(bad(format!("image {img} has order not dividing {ord}")));
        }
        exps.push(
            scaled
                .to_integer()
                .to_u64()
                .ok_or_else(|| bad("image exponent out of range"))?,
        );
    }
    Ok(DirichletCharacter::from_exponents(doc.modulus, &exps)?)
}

// ---------------------------------------------------------------------------
// places and local values
// ---------------------------------------------------------------------------

pub fn place_to_string(pl: &Place) -> String {
    match pl {
        Place::Prime(p) => p.to_string(),
        Place::RealInfinity => "inf".into(),
        Place::FfPrime(pi) => format!("ffprime:{pi:?}"),
        Place::FfInfinity => "ffinf".into(),
    }
}

pub fn place_from_string(s: &str) -> Result<Place, IoError> {
    if s == "inf" {
        return Ok(Place::RealInfinity);
    }
    let p: u64 = s.parse().map_err(|_| bad(format!("bad place `{s}`")))?;
    Ok(Place::prime(p)?)
}

/// {"val": v, "unit": ["u", k]} | {"exact": "a/b"} | {"sign": "+"}
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoordJson {
    Residue { val: i64, unit: (String, u32) },
    Exact { exact: String },
    Sign { sign: String },
}

pub fn coord_to_json(v: &LocalValue) -> CoordJson {
    match v {
        LocalValue::Exact(r) => CoordJson::Exact { exact: format_rat(r) },
        LocalValue::Approx(a) => CoordJson::Residue {
            val: a.valuation(),
            unit: (a.unit_residue().to_string(), a.precision()),
        },
        LocalValue::Real(d) => CoordJson::Sign {
            sign: match d.sign {
                RealSign::Positive => "+".into(),
                RealSign::Negative => "-".into(),
            },
        },
    }
}

pub fn coord_from_json(doc: &CoordJson, place: &Place) -> Result<LocalValue, IoError> {
    match doc {
        CoordJson::Exact { exact } => Ok(LocalValue::Exact(parse_rat(exact)?)),
        CoordJson::Residue { val, unit } => {
            let p = match place {
                Place::Prime(p) => *p,
                _ => return Err(bad("residue data only makes sense at a finite prime")),
            };
            let u: BigUint =
                unit.0.parse().map_err(|_| bad(format!("bad unit residue `{}`", unit.0)))?;
            Ok(LocalValue::Approx(PAdicApprox::new(p, *val, u, unit.1)))
        }
        CoordJson::Sign { sign } => {
            let s = match sign.as_str() {
                "+" => RealSign::Positive,
                "-" => RealSign::Negative,
                other => return Err(bad(format!("bad sign `{other}`"))),
            };
            Ok(LocalValue::Real(RealDatum::of_sign(s)))
        }
    }
}

// ---------------------------------------------------------------------------
// adelic points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComponentJson {
    pub place: String,
    pub coords: Vec<CoordJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DefaultJson {
    Unit(String),
    Diagonal { diagonal: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AdelicPointJson {
    pub rank: usize,
    pub excluded: Vec<String>,
    pub components: Vec<ComponentJson>,
    pub default: DefaultJson,
}

pub fn point_to_json(x: &AdelicPoint) -> AdelicPointJson {
    AdelicPointJson {
        rank: x.rank(),
        excluded: x.excluded.iter().map(place_to_string).collect(),
        components: x
            .explicit
            .iter()
            .map(|(pl, coords)| ComponentJson {
                place: place_to_string(pl),
                coords: coords.iter().map(coord_to_json).collect(),
            })
            .collect(),
        default: match &x.default {
            DefaultComponent::Unit => DefaultJson::Unit("unit".into()),
            DefaultComponent::Diagonal(q) => {
                DefaultJson::Diagonal { diagonal: q.iter().map(format_rat).collect() }
            }
        },
    }
}

pub fn point_from_json(doc: &AdelicPointJson) -> Result<AdelicPoint, IoError> {
    let mut excluded = BTreeSet::new();
    for s in &doc.excluded {
        excluded.insert(place_from_string(s)?);
    }
    let mut explicit = BTreeMap::new();
    for comp in &doc.components {
        let pl = place_from_string(&comp.place)?;
        let coords: Vec<LocalValue> = comp
            .coords
            .iter()
            .map(|c| coord_from_json(c, &pl))
            .collect::<Result<_, _>>()?;
        explicit.insert(pl, coords);
    }
    let default = match &doc.default {
        DefaultJson::Unit(tag) if tag == "unit" => DefaultComponent::Unit,
        DefaultJson::Unit(tag) => return Err(bad(format!("unknown default `{tag}`"))),
        DefaultJson::Diagonal { diagonal } => DefaultComponent::Diagonal(
            diagonal.iter().map(|s| parse_rat(s)).collect::<Result<_, _>>()?,
        ),
    };
    AdelicPoint::new(SplitTorus::new(doc.rank), explicit, default, excluded)
        .map_err(|e| bad(e.to_string()))
}

// ---------------------------------------------------------------------------
// curves, embeddings, curve data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveJson {
    pub base: String,
    #[serde(rename = "D")]
    pub removed: Vec<String>,
    pub basepoint: String,
}

pub fn curve_from_json(doc: &CurveJson) -> Result<PuncturedLine, IoError> {
    if doc.base != "Q" {
        return Err(bad("rational-base curves only here; use ff commands for F_q(t)"));
    }
    let removed = doc
        .removed
        .iter()
        .map(|s| {
            if s == "inf" {
                Ok(ProjPoint::Infinity)
            } else {
                Ok(ProjPoint::Finite(parse_rat(s)?))
            }
        })
        .collect::<Result<_, IoError>>()?;
    PuncturedLine::new(removed, parse_rat(&doc.basepoint)?).map_err(|e| bad(e.to_string()))
}

pub fn curve_to_json(curve: &PuncturedLine) -> CurveJson {
    CurveJson {
        base: "Q".into(),
        removed: curve
            .removed
            .iter()
            .map(|p| match p {
                ProjPoint::Finite(a) => format_rat(a),
                ProjPoint::Infinity => "inf".into(),
            })
            .collect(),
        basepoint: format_rat(&curve.basepoint),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EmbeddingJson {
    pub curve: CurveJson,
    pub rank: usize,
    /// each coordinate as ["a","b","c","d"] for (a·T + b)/(c·T + d)
    pub coords: Vec<[String; 4]>,
    /// relations as readable polynomials in X1..Xd
    pub relations: Vec<String>,
    pub anchor: String,
}

pub fn embedding_to_json(emb: &TorusEmbedding) -> EmbeddingJson {
    let vars: Vec<String> = (0..emb.rank).map(|i| format!("X{}", i + 1)).collect();
    EmbeddingJson {
        curve: curve_to_json(&emb.curve),
        rank: emb.rank,
        coords: emb
            .coords
            .iter()
            .map(|f| {
                [
                    format_rat(&f.num.0),
                    format_rat(&f.num.1),
                    format_rat(&f.den.0),
                    format_rat(&f.den.1),
                ]
            })
            .collect(),
        relations: emb
            .relations
            .iter()
            .map(|r| {
                let nv = emb.rank;
                let mut p = Poly::zero(nv);
                p = p.add(&Poly::variable(nv, r.i).scale(&r.ci));
                p = p.add(&Poly::variable(nv, r.j).scale(&r.cj));
                p = p.add(&Poly::constant(nv, r.c.clone()));
                p.to_string_with(&vars)
            })
            .collect(),
        anchor: match &emb.anchor {
            ProjPoint::Finite(a) => format_rat(a),
            ProjPoint::Infinity => "inf".into(),
        },
    }
}

/// {"default": "2", "overrides": [{"place": "7", "value": {...}}]}
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveDataJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
    #[serde(default)]
    pub overrides: Vec<OverrideJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OverrideJson {
    pub place: String,
    pub value: CoordJson,
}

pub fn curve_data_from_json(doc: &CurveDataJson) -> Result<CurveAdelicData, IoError> {
    let default_t = doc.default.as_ref().map(|s| parse_rat(s)).transpose()?;
    let mut overrides = BTreeMap::new();
    for o in &doc.overrides {
        let pl = place_from_string(&o.place)?;
        overrides.insert(pl.clone(), coord_from_json(&o.value, &pl)?);
    }
    Ok(CurveAdelicData { default_t, overrides })
}

// ---------------------------------------------------------------------------
// models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelBaseJson {
    pub inverted: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DilationJson {
    pub prime: u64,
    pub center: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelJson {
    pub base: ModelBaseJson,
    pub vars: Vec<String>,
    pub relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base_relations: Vec<String>,
    pub shape: String,
    #[serde(default)]
    pub history: Vec<DilationJson>,
    #[serde(default)]
    pub unit_pairs: Vec<(usize, usize)>,
}

pub fn model_to_json(model: &AffineModel) -> ModelJson {
    ModelJson {
        base: ModelBaseJson { inverted: model.inverted.clone() },
        vars: model.vars.clone(),
        relations: model.relations.iter().map(|r| r.to_string_with(&model.vars)).collect(),
        base_relations: model
            .base_relations
            .iter()
            .map(|r| r.to_string_with(&model.vars))
            .collect(),
        shape: match model.shape {
            ModelShape::Hypersurface => "hypersurface".into(),
            ModelShape::CompleteIntersection => "complete_intersection".into(),
            ModelShape::General => "general".into(),
        },
        history: model
            .history
            .iter()
            .map(|h| DilationJson { prime: h.prime, center: h.center.clone() })
            .collect(),
        unit_pairs: model.unit_pairs.clone(),
    }
}

pub fn model_from_json(doc: &ModelJson) -> Result<AffineModel, IoError> {
    let shape = match doc.shape.as_str() {
        "hypersurface" => ModelShape::Hypersurface,
        "complete_intersection" => ModelShape::CompleteIntersection,
        "general" => ModelShape::General,
        other => return Err(bad(format!("unknown shape `{other}`"))),
    };
    let relations: Vec<Poly> = doc
        .relations
        .iter()
        .map(|s| parse_poly(s, &doc.vars))
        .collect::<Result<_, _>>()?;
    let base_relations: Vec<Poly> = if doc.base_relations.is_empty() {
        relations.clone()
    } else {
        doc.base_relations
            .iter()
            .map(|s| parse_poly(s, &doc.vars))
            .collect::<Result<_, _>>()?
    };
    let mut model = AffineModel::new(doc.base.inverted.clone(), doc.vars.clone(), base_relations, shape);
    model.relations = relations.into_iter().map(|r| r.normalize_content(&model.inverted)).collect();
    model.history = doc
        .history
        .iter()
        .map(|h| DilationRecord { prime: h.prime, center: h.center.clone() })
        .collect();
    model.unit_pairs = doc.unit_pairs.clone();
    Ok(model)
}

// ---------------------------------------------------------------------------
// subschemes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubschemeJson {
    pub rank: usize,
    pub points: Vec<Vec<String>>,
}

pub fn subscheme_from_json(doc: &SubschemeJson) -> Result<FiniteSubscheme, IoError> {
    let points = doc
        .points
        .iter()
        .map(|p| p.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    for p in &points {
        if p.len() != doc.rank {
            return Err(bad("subscheme point arity does not match the rank"));
        }
    }
    Ok(FiniteSubscheme::new(doc.rank, points))
}

pub fn subscheme_to_json(z: &FiniteSubscheme) -> SubschemeJson {
    SubschemeJson {
        rank: z.rank,
        points: z.points.iter().map(|p| p.iter().map(format_rat).collect()).collect(),
    }
}

// ---------------------------------------------------------------------------
// function-field data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FfPointJson {
    pub rank: usize,
    pub default: Vec<String>,
    #[serde(default)]
    pub overrides: Vec<FfOverrideJson>,
    #[serde(default)]
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FfOverrideJson {
    pub place: String,
    pub coords: Vec<String>,
}

pub fn parse_base(base: &str) -> Result<FqCtx, IoError> {
    let inner = base
        .strip_prefix('F')
        .and_then(|s| s.strip_suffix('t'))
        .ok_or_else(|| bad(format!("bad base `{base}`; expected e.g. F3t")))?;
    let q: u64 = inner.parse().map_err(|_| bad(format!("bad base `{base}`")))?;
    Ok(FqCtx::new(q)?)
}

pub fn ff_place_from_string(ctx: &FqCtx, s: &str) -> Result<FfPlace, IoError> {
    if s == "inf" {
        return Ok(FfPlace::Infinity);
    }
    Ok(FfPlace::finite(ctx, poly_parse(ctx, s)?)?)
}

pub fn ff_ratfn_from_string(ctx: &FqCtx, s: &str) -> Result<RatFn, IoError> {
    match s.split_once('/') {
        Some((n, d)) => {
            Ok(RatFn::new(ctx, poly_parse(ctx, n.trim())?, poly_parse(ctx, d.trim())?)?)
        }
        None => Ok(RatFn::from_poly(poly_parse(ctx, s)?)?),
    }
}

pub fn ff_point_from_json(ctx: &FqCtx, doc: &FfPointJson) -> Result<FfAdelicPoint, IoError> {
    let default: Vec<RatFn> = doc
        .default
        .iter()
        .map(|s| ff_ratfn_from_string(ctx, s))
        .collect::<Result<_, _>>()?;
    if default.len() != doc.rank {
        return Err(bad("default arity does not match the rank"));
    }
    let mut overrides = BTreeMap::new();
    for o in &doc.overrides {
        let pl = ff_place_from_string(ctx, &o.place)?;
        let coords: Vec<RatFn> = o
            .coords
            .iter()
            .map(|s| ff_ratfn_from_string(ctx, s))
            .collect::<Result<_, _>>()?;
        if coords.len() != doc.rank {
            return Err(bad("override arity does not match the rank"));
        }
        overrides.insert(pl, coords);
    }
    let mut excluded = BTreeSet::new();
    for s in &doc.excluded {
        excluded.insert(ff_place_from_string(ctx, s)?);
    }
    Ok(FfAdelicPoint { rank: doc.rank, default, overrides, excluded })
}

pub fn ff_character_to_json(ctx: &FqCtx, chi: &FfCharacter) -> serde_json::Value {
    match chi {
        FfCharacter::ConstantExt(n) => serde_json::json!({"constant_ext": n}),
        FfCharacter::KummerCover { n, f } => serde_json::json!({
            "kummer": {"order": n, "attached_to": f.to_string(ctx)}
        }),
    }
}

// ---------------------------------------------------------------------------
// verdicts and certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ObstructionCertJson {
    /// one character per coordinate
    pub tuple: Vec<CharacterJson>,
    pub coordinate: usize,
    /// total invariant sum, nonzero
    pub pairing: String,
    /// replay data: per place, per coordinate, valuation and unit residue
    /// modulo the stated modulus
    pub contributions: Vec<ContributionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulled_back: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ContributionJson {
    pub place: String,
    pub coordinate: usize,
    pub valuation: i64,
    /// unit residue and the modulus it is stated at (1 when irrelevant)
    pub residue: (String, String),
    /// the local invariant this contributes
    pub invariant: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExclusionCertJson {
    pub n: u64,
    pub v0: u64,
    pub x_residues: Vec<u64>,
    pub witnesses: Vec<WitnessJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WitnessJson {
    pub z: Vec<String>,
    pub coordinate: usize,
    pub ratio_residue: u64,
    pub power_value: u64,
}

pub fn exclusion_to_json(cert: &ExclusionCertificate) -> ExclusionCertJson {
    ExclusionCertJson {
        n: cert.n,
        v0: cert.v0,
        x_residues: cert.x_residues.clone(),
        witnesses: cert
            .witnesses
            .iter()
            .map(|w| WitnessJson {
                z: w.z.iter().map(format_rat).collect(),
                coordinate: w.coordinate,
                ratio_residue: w.ratio_residue,
                power_value: w.power_value,
            })
            .collect(),
    }
}

pub fn exclusion_from_json(doc: &ExclusionCertJson) -> Result<ExclusionCertificate, IoError> {
    Ok(ExclusionCertificate {
        n: doc.n,
        v0: doc.v0,
        x_residues: doc.x_residues.clone(),
        witnesses: doc
            .witnesses
            .iter()
            .map(|w| {
                Ok(ExclusionWitness {
                    z: w.z.iter().map(|s| parse_rat(s)).collect::<Result<_, _>>()?,
                    coordinate: w.coordinate,
                    ratio_residue: w.ratio_residue,
                    power_value: w.power_value,
                })
            })
            .collect::<Result<_, IoError>>()?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MemberCertJson {
    pub z: Vec<String>,
    pub twist: Vec<i8>,
    pub checks: Vec<String>,
}

pub fn member_to_json(m: &MembershipCertificate) -> MemberCertJson {
    MemberCertJson {
        z: m.z.iter().map(format_rat).collect(),
        twist: m.twist.clone(),
        checks: m.checks.clone(),
    }
}

/// The one verdict envelope every command emits.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerdictJson {
    pub kind: String,
    pub payload: serde_json::Value,
    pub provenance: ProvenanceJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProvenanceJson {
    /// sha256 of each canonicalized input document, in argument order
    pub inputs: Vec<String>,
    pub bounds: BTreeMap<String, String>,
    pub version: String,
}

/// Exit status policy: definitive verdicts exit 0, Inconclusive exits 2.
pub fn verdict_exit_code(kind: &str) -> i32 {
    match kind {
        "inconclusive" => 2,
        _ => 0,
    }
}

/// Replay data for an obstruction certificate: recompute the contributions
/// the verdict is built from, so the checker never trusts the search.
pub fn obstruction_contributions(
    x: &AdelicPoint,
    tuple: &CharacterTuple,
) -> Result<Vec<ContributionJson>, IoError> {
    let mut out = Vec::new();
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
            for (p, _) in crate::rat::support(qi) {
                places.insert(Place::Prime(p));
            }
        }
    }
    for pl in places {
        if x.excluded.contains(&pl) {
            continue;
        }
        let Some(coords) = x.component(&pl) else { continue };
        for (j, (chi, xv)) in tuple.0.iter().zip(&coords).enumerate() {
            if chi.is_trivial() {
                continue;
            }
            let inv = crate::reciprocity::local_invariant(chi, &pl, xv)
                .map_err(|e| bad(e.to_string()))?;
            match &pl {
                Place::Prime(p) => {
                    let val = xv.valuation_at(*p).map_err(IoError::Arith)?;
                    let e = {
                        let mut e = 0u32;
                        let mut m = chi.modulus();
                        while m % p == 0 {
                            e += 1;
                            m /= p;
                        }
                        e
                    };
                    let (residue, modulus) = if e > 0 {
                        let pe = p.pow(e);
                        (
                            xv.unit_residue_at(*p, e).map_err(IoError::Arith)?.to_string(),
                            pe.to_string(),
                        )
                    } else {
                        ("1".into(), "1".into())
                    };
                    out.push(ContributionJson {
                        place: place_to_string(&pl),
                        coordinate: j,
                        valuation: val,
                        residue: (residue, modulus),
                        invariant: inv.to_string(),
                    });
                }
                Place::RealInfinity => {
                    let sign = xv.real_sign().map_err(IoError::Arith)?;
                    out.push(ContributionJson {
                        place: "inf".into(),
                        coordinate: j,
                        valuation: 0,
                        residue: (
                            match sign {
                                RealSign::Positive => "+".into(),
                                RealSign::Negative => "-".into(),
                            },
                            "sign".into(),
                        ),
                        invariant: inv.to_string(),
                    });
                }
                _ => {}
            }
        }
    }
    Ok(out)
}

pub fn poly_string_ff(ctx: &FqCtx, p: &[u64]) -> String {
    poly_to_string(ctx, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i64;
    use crate::toruslab::s_inf;

    #[test]
    fn character_roundtrip() {
        for chi in crate::reciprocity::enumerate_characters(16) {
            let doc = character_to_json(&chi);
            let back = character_from_json(&doc).unwrap();
            assert_eq!(chi, back);
        }
    }

    #[test]
    fn point_roundtrip() {
        let mut x = AdelicPoint::diagonal(&[rat_i64(3), crate::rat::rat(2, 5)], s_inf()).unwrap();
        x.explicit.insert(
            Place::Prime(7),
            vec![
                LocalValue::Approx(PAdicApprox::new(7, 1, 3u32.into(), 2)),
                LocalValue::Exact(rat_i64(2)),
            ],
        );
        let doc = point_to_json(&x);
        let s = serde_json::to_string(&doc).unwrap();
        let doc2: AdelicPointJson = serde_json::from_str(&s).unwrap();
        let back = point_from_json(&doc2).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn model_roundtrip() {
        let emb = {
            let curve = PuncturedLine::new(
                vec![
                    ProjPoint::Finite(rat_i64(0)),
                    ProjPoint::Finite(rat_i64(1)),
                    ProjPoint::Infinity,
                ],
                rat_i64(2),
            )
            .unwrap();
            crate::curves::embed(&curve).unwrap()
        };
        let model = crate::models::clear_denominators(&emb, &[2]);
        let dilated = crate::models::dilate(&model, 3, &[1, 1, 1, 1]).unwrap();
        let doc = model_to_json(&dilated);
        let s = serde_json::to_string(&doc).unwrap();
        let doc2: ModelJson = serde_json::from_str(&s).unwrap();
        let back = model_from_json(&doc2).unwrap();
        assert_eq!(dilated.relations, back.relations);
        assert_eq!(dilated.base_relations, back.base_relations);
        assert_eq!(dilated.history, back.history);
        assert_eq!(dilated.congruences(), back.congruences());
    }

    #[test]
    fn curve_and_subscheme_parsing() {
        let doc = CurveJson {
            base: "Q".into(),
            removed: vec!["0".into(), "1".into(), "inf".into()],
            basepoint: "2".into(),
        };
        let curve = curve_from_json(&doc).unwrap();
        assert!(curve.is_hyperbolic());
        assert_eq!(curve_to_json(&curve), doc);

        let z = subscheme_from_json(&SubschemeJson {
            rank: 1,
            points: vec![vec!["1".into()], vec!["4".into()]],
        })
        .unwrap();
        assert_eq!(z.points.len(), 2);
    }

    #[test]
    fn ff_point_parsing() {
        let ctx = parse_base("F3t").unwrap();
        let doc = FfPointJson {
            rank: 2,
            default: vec!["2t".into(), "t+1".into()],
            overrides: vec![FfOverrideJson {
                place: "t".into(),
                coords: vec!["2t".into(), "2t+2".into()],
            }],
            excluded: vec![],
        };
        let x = ff_point_from_json(&ctx, &doc).unwrap();
        assert_eq!(x.rank, 2);
        assert_eq!(x.overrides.len(), 1);
    }
}
