//! Equivalence harness: evaluates several Hardy quantities over a family, summarizes the
//! pairwise ratios, and compares their spreads with frozen constants.

use super::family::{atom_family, reference_family, Family};
use super::frozen::{FrozenKey, FrozenStore};
use super::{
    caloric_many, harmonic_many, maximal_many, multiplier_many, nontangential_many, riesz_many,
    growth_ratio,
};
use crate::amalgam::Exponents;
use crate::error::{param, Error, Result};
use crate::extension::{extend, KernelTag, TimeGrid};
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::MultiplierFamily;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Slack applied to frozen constants.
pub const FROZEN_SLACK: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    /// `|| M_phi f ||_{p,q}`.
    Maximal,
    /// Riesz quantity of the given order.
    Riesz(usize),
    /// Multiplier quantity with [`default_multipliers`].
    Multiplier,
    /// `|| u* ||_{p,q}` of the Poisson extension.
    Nontangential,
    /// `sup_t || |F(., t)| ||_{p,q}` of the caloric lift.
    Caloric,
    /// `sup_t || |F(., t)| ||_{p,q}` of the harmonic lift.
    Harmonic,
}

impl Method {
    /// Every method, in report order.
    pub const ALL: [Method; 7] = [
        Method::Maximal,
        Method::Riesz(1),
        Method::Riesz(2),
        Method::Multiplier,
        Method::Nontangential,
        Method::Caloric,
        Method::Harmonic,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Maximal => write!(f, "maximal"),
            Method::Riesz(m) => write!(f, "riesz{m}"),
            Method::Multiplier => write!(f, "multiplier"),
            Method::Nontangential => write!(f, "nontangential"),
            Method::Caloric => write!(f, "caloric"),
            Method::Harmonic => write!(f, "harmonic"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "maximal" => Method::Maximal,
            "riesz" => Method::Riesz(1),
            "multiplier" => Method::Multiplier,
            "nontangential" => Method::Nontangential,
            "caloric" => Method::Caloric,
            "harmonic" => Method::Harmonic,
            other => match other.strip_prefix("riesz").and_then(|m| m.parse::<usize>().ok()) {
                Some(m) if m >= 1 => Method::Riesz(m),
                _ => return param("method", format!("unknown method `{other}`")),
            },
        })
    }
}

/// `{1, sign}` in d=1, `{1, -i z_1, -i z_2}` in d=2.
pub fn default_multipliers(dim: usize) -> MultiplierFamily {
    if dim == 1 {
        MultiplierFamily::identity_and_sign()
    } else {
        MultiplierFamily::identity_and_riesz(dim)
    }
}

/// Key part identifying a grid and a time grid, e.g. `d1-L32-n4096:t48-0.001-64`.
pub fn grid_key(spec: &GridSpec, tg: &TimeGrid) -> String {
    format!("{}:{}", spec.grid_id(), tg.id())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberValues {
    pub name: String,
    pub values: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Ratios `a / b` over the members where both are positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub pair: String,
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// `max / min`.
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub key: String,
    pub observed: f64,
    pub frozen: Option<f64>,
    pub limit: Option<f64>,
    /// `None` when no constant is available.
    pub pass: Option<bool>,
    pub note: Option<String>,
}

impl Comparison {
    /// Compares `observed <= FROZEN_SLACK * frozen` for `key`.
    pub fn against(store: Option<&FrozenStore>, key: &FrozenKey, observed: f64) -> Self {
        let label = format!(
            "{}|{}|{}|{}|{}",
            key.family, key.pair, key.p, key.q, key.grid_id
        );
        let (frozen, note) = match store.map(|s| s.lookup(key)) {
            None => (None, Some("no frozen store".to_string())),
            Some(Ok(None)) => (None, Some("no frozen constant".to_string())),
            Some(Ok(Some(v))) => (Some(v), None),
            Some(Err(e)) => (None, Some(e.to_string())),
        };
        let limit = frozen.map(|v| v * FROZEN_SLACK);
        Comparison {
            key: label,
            observed,
            frozen,
            limit,
            pass: limit.map(|l| observed <= l),
            note,
        }
    }

    /// Refused comparisons (grid mismatch) count as failures in assertion mode.
    pub fn refused(&self) -> bool {
        self.note.as_deref().is_some_and(|n| n.contains("refusing"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub family: String,
    pub exponents: String,
    pub methods: Vec<String>,
    pub members: Vec<MemberValues>,
    pub pairs: Vec<PairStats>,
    /// Members with a vanishing quantity, excluded from the ratios of that quantity.
    pub flagged: Vec<String>,
    pub grid_id: String,
    pub time_grid_id: String,
    pub comparisons: Vec<Comparison>,
}

impl EquivalenceReport {
    pub fn pair(&self, a: Method, b: Method) -> Option<&PairStats> {
        let name = format!("{a}~{b}");
        self.pairs.iter().find(|p| p.pair == name)
    }

    /// No failed and no refused comparison.
    pub fn passed(&self) -> bool {
        self.comparisons
            .iter()
            .all(|c| c.pass != Some(false) && !c.refused())
    }
}

/// All method values of one function for several exponent pairs: `out[e][method]`.
fn member_values(
    f: &GridFunction,
    methods: &[Method],
    es: &[Exponents],
    tg: &TimeGrid,
) -> Result<(Vec<BTreeMap<String, f64>>, Vec<Vec<String>>)> {
    let mut values = vec![BTreeMap::new(); es.len()];
    let mut warnings = vec![Vec::new(); es.len()];
    for &m in methods {
        let key = m.to_string();
        let vals: Vec<f64> = match m {
            Method::Maximal => maximal_many(f, es, tg)?,
            Method::Nontangential => nontangential_many(f, es, tg, 1.0)?,
            Method::Caloric => caloric_many(f, es, tg)?,
            Method::Harmonic => harmonic_many(f, es, tg)?,
            Method::Riesz(order) => {
                let qs = riesz_many(f, es, tg, order)?;
                for (w, q) in warnings.iter_mut().zip(&qs) {
                    w.extend(q.warning.iter().map(|s| format!("{key}: {s}")));
                }
                qs.into_iter().map(|q| q.value).collect()
            }
            Method::Multiplier => {
                let qs = multiplier_many(f, &default_multipliers(f.spec().dim()), es)?;
                for (w, q) in warnings.iter_mut().zip(&qs) {
                    w.extend(q.warning.iter().map(|s| format!("{key}: {s}")));
                }
                qs.into_iter().map(|q| q.value).collect()
            }
        };
        for (map, v) in values.iter_mut().zip(vals) {
            map.insert(key.clone(), v);
        }
    }
    Ok((values, warnings))
}

fn pair_stats(members: &[MemberValues], a: &str, b: &str) -> PairStats {
    let ratios: Vec<f64> = members
        .iter()
        .filter_map(|m| {
            let (x, y) = (m.values[a], m.values[b]);
            (x > 0.0 && y > 0.0).then(|| x / y)
        })
        .collect();
    let min = ratios.iter().cloned().reduce(f64::min);
    let max = ratios.iter().cloned().reduce(f64::max);
    PairStats {
        pair: format!("{a}~{b}"),
        count: ratios.len(),
        min,
        max,
        spread: min.zip(max).map(|(lo, hi)| hi / lo),
    }
}

/// Reports for several exponent pairs, each quantity computed once per member.
pub fn equivalence_reports(
    family: &Family,
    es: &[Exponents],
    methods: &[Method],
    tg: &TimeGrid,
    store: Option<&FrozenStore>,
) -> Result<Vec<EquivalenceReport>> {
    if family.is_empty() {
        return param("family", "empty family");
    }
    if methods.is_empty() {
        return param("methods", "no methods selected");
    }
    let spec = *family.members[0].function.spec();
    if methods.contains(&Method::Multiplier) {
        for m in &family.members {
            let f = &m.function;
            if f.mean().norm() > 1e-10 * f.max_abs().max(f64::MIN_POSITIVE) {
                return param("family", format!("member `{}` is not mean-free", m.name));
            }
        }
    }
    let mut per_e: Vec<Vec<MemberValues>> = vec![Vec::new(); es.len()];
    let mut flagged: Vec<Vec<String>> = vec![Vec::new(); es.len()];
    for m in &family.members {
        spec.ensure_same(m.function.spec())?;
        let (values, warnings) = member_values(&m.function, methods, es, tg)?;
        let nonzero = m.function.max_abs() > 0.0;
        for (i, (v, w)) in values.into_iter().zip(warnings).enumerate() {
            for (k, x) in &v {
                if nonzero && *x <= 0.0 {
                    flagged[i].push(format!("{}: {k} vanishes on a nonzero function", m.name));
                }
            }
            per_e[i].push(MemberValues {
                name: m.name.clone(),
                values: v,
                warnings: w,
            });
        }
    }
    let names: Vec<String> = methods.iter().map(|m| m.to_string()).collect();
    let gkey = grid_key(&spec, tg);
    Ok(es
        .iter()
        .zip(per_e)
        .zip(flagged)
        .map(|((&e, members), flagged)| {
            let mut pairs = Vec::new();
            for (i, a) in names.iter().enumerate() {
                for b in &names[i + 1..] {
                    pairs.push(pair_stats(&members, a, b));
                }
            }
            let comparisons = pairs
                .iter()
                .filter_map(|p| {
                    let key = FrozenKey::new(&family.id, &p.pair, e, &gkey);
                    p.spread.map(|s| Comparison::against(store, &key, s))
                })
                .collect();
            EquivalenceReport {
                family: family.id.clone(),
                exponents: e.label(),
                methods: names.clone(),
                members,
                pairs,
                flagged,
                grid_id: spec.grid_id(),
                time_grid_id: tg.id(),
                comparisons,
            }
        })
        .collect())
}

pub fn equivalence_report(
    family: &Family,
    e: Exponents,
    methods: &[Method],
    tg: &TimeGrid,
    store: Option<&FrozenStore>,
) -> Result<EquivalenceReport> {
    Ok(equivalence_reports(family, &[e], methods, tg, store)?.remove(0))
}

/// `max` over members of the heat-stack growth ratio
/// `max_t t^{d/(2 max{p,q})} max_x |u| / ||u||_{T^{p,q}}`.
pub fn growth_constant(family: &Family, e: Exponents, tg: &TimeGrid) -> Result<f64> {
    let mut best = 0.0f64;
    for m in &family.members {
        let stack = extend(&m.function, KernelTag::Heat, tg)?;
        best = best.max(growth_ratio(&stack, e)?.ratio);
    }
    Ok(best)
}

/// `hardy_norm_maximal` over the atom family and its spread `max / min`.
pub fn atom_band(spec: GridSpec, e: Exponents, tg: &TimeGrid) -> Result<(Vec<(String, f64)>, f64)> {
    let fam = atom_family(spec, e)?;
    let values = fam
        .members
        .iter()
        .map(|m| Ok((m.name.clone(), maximal_many(&m.function, &[e], tg)?[0])))
        .collect::<Result<Vec<_>>>()?;
    let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.1).fold(0.0, f64::max);
    if !(lo > 0.0) {
        return Err(Error::Numerical("an atom has vanishing maximal norm".into()));
    }
    Ok((values, hi / lo))
}

/// Designated grids of a freeze run.
#[derive(Debug, Clone, PartialEq)]
pub struct FreezeGrids {
    pub spec: GridSpec,
    pub times: TimeGrid,
}

/// Exponent pairs with three-way equivalence constants.
pub const FROZEN_EXPONENTS: [(f64, f64); 2] = [(1.0, 1.0), (2.0, 3.0)];
/// The pair used only for the maximal/nontangential leg.
pub const LEG_EXPONENTS: (f64, f64) = (1.2, 0.9);

/// Constants of the oracle run on `grids`:
/// every pairwise spread on the reference family at the frozen exponents, the
/// maximal/nontangential spread at the leg exponents, the heat growth constant and the atom band.
pub fn freeze_constants(grids: &FreezeGrids) -> Result<FrozenStore> {
    let spec = grids.spec;
    let tg = &grids.times;
    let gkey = grid_key(&spec, tg);
    let family = reference_family(spec)?;
    let mut store = FrozenStore::new();
    let es: Vec<Exponents> = FROZEN_EXPONENTS
        .iter()
        .map(|&(p, q)| Exponents::new(p, q))
        .collect::<Result<_>>()?;
    for report in equivalence_reports(&family, &es, &Method::ALL, tg, None)? {
        let e = parse_label(&report.exponents)?;
        for p in &report.pairs {
            if let Some(s) = p.spread {
                store.insert(FrozenKey::new(&family.id, &p.pair, e, &gkey), s);
            }
        }
    }
    let leg = Exponents::new(LEG_EXPONENTS.0, LEG_EXPONENTS.1)?;
    let report = equivalence_report(&family, leg, &[Method::Maximal, Method::Nontangential], tg, None)?;
    for p in &report.pairs {
        if let Some(s) = p.spread {
            store.insert(FrozenKey::new(&family.id, &p.pair, leg, &gkey), s);
        }
    }
    for &e in &es {
        store.insert(
            FrozenKey::new("heat_growth", "sup~tent", e, &gkey),
            growth_constant(&family, e, tg)?,
        );
    }
    let unit = Exponents::new(1.0, 1.0)?;
    let (_, band) = atom_band(spec, unit, tg)?;
    store.insert(FrozenKey::new("atoms", "maximal_band", unit, &gkey), band);
    Ok(store)
}

fn parse_label(label: &str) -> Result<Exponents> {
    let (p, q) = label
        .split_once(',')
        .ok_or_else(|| Error::Format(format!("bad exponent label `{label}`")))?;
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Format(format!("bad exponent `{s}`: {e}")))
    };
    Exponents::new(parse(p)?, parse(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, FunctionSpec};
    use crate::hardy::Member;

    fn small_family(count: usize) -> Family {
        let spec = make_grid(1, 16.0, 512).unwrap();
        let members = (0..count)
            .map(|i| Member {
                name: format!("g{i}"),
                function: sample(
                    &FunctionSpec::MeanFreeGaussian { center: vec![i as f64], width: 1.0 + i as f64 },
                    spec,
                )
                .unwrap()
                .remove_mean(),
            })
            .collect();
        Family { id: "small".into(), members }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("riesz0".parse::<Method>().is_err());
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn single_member_spread_is_one() {
        let fam = small_family(1);
        let tg = TimeGrid::log_spaced(1e-2, 16.0, 12).unwrap();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let r = equivalence_report(&fam, e, &[Method::Maximal, Method::Riesz(1)], &tg, None).unwrap();
        let p = r.pair(Method::Maximal, Method::Riesz(1)).unwrap();
        let ratio = r.members[0].values["maximal"] / r.members[0].values["riesz1"];
        assert_eq!(p.min, Some(ratio));
        assert_eq!(p.max, Some(ratio));
        assert_eq!(p.spread, Some(1.0));
        assert_eq!(r.comparisons[0].pass, None);
    }

    #[test]
    fn comparisons_use_the_store() {
        let fam = small_family(3);
        let tg = TimeGrid::log_spaced(1e-2, 16.0, 12).unwrap();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let methods = [Method::Maximal, Method::Multiplier];
        let r = equivalence_report(&fam, e, &methods, &tg, None).unwrap();
        let spread = r.pairs[0].spread.unwrap();
        assert!(spread >= 1.0);
        let spec = *fam.members[0].function.spec();
        let mut store = FrozenStore::new();
        store.insert(FrozenKey::new("small", "maximal~multiplier", e, &grid_key(&spec, &tg)), spread);
        let r = equivalence_report(&fam, e, &methods, &tg, Some(&store)).unwrap();
        assert!(r.passed());
        let mut tight = FrozenStore::new();
        tight.insert(FrozenKey::new("small", "maximal~multiplier", e, &grid_key(&spec, &tg)), spread / 2.0);
        assert!(!equivalence_report(&fam, e, &methods, &tg, Some(&tight)).unwrap().passed());
        let mut elsewhere = FrozenStore::new();
        elsewhere.insert(FrozenKey::new("small", "maximal~multiplier", e, "other-grid"), spread);
        let r = equivalence_report(&fam, e, &methods, &tg, Some(&elsewhere)).unwrap();
        assert!(r.comparisons[0].refused());
        assert!(!r.passed());
    }

    #[test]
    fn zero_member_is_flagged_and_excluded() {
        let mut fam = small_family(2);
        let spec = *fam.members[0].function.spec();
        fam.members.push(Member { name: "zero".into(), function: GridFunction::zeros(spec) });
        let tg = TimeGrid::log_spaced(1e-2, 16.0, 8).unwrap();
        let e = Exponents::new(1.0, 1.0).unwrap();
        let r = equivalence_report(&fam, e, &[Method::Maximal, Method::Caloric], &tg, None).unwrap();
        assert_eq!(r.pairs[0].count, 2);
        assert!(r.flagged.is_empty());
    }

    #[test]
    fn mean_free_required_for_multiplier() {
        let spec = make_grid(1, 16.0, 512).unwrap();
        let f = sample(&FunctionSpec::Gaussian { center: vec![], width: 1.0 }, spec).unwrap();
        let fam = Family { id: "x".into(), members: vec![Member { name: "g".into(), function: f }] };
        let tg = TimeGrid::log_spaced(1e-2, 16.0, 8).unwrap();
        let e = Exponents::new(1.0, 1.0).unwrap();
        assert!(equivalence_report(&fam, e, &[Method::Maximal, Method::Multiplier], &tg, None).is_err());
    }
}
