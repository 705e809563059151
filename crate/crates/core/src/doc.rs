//! JSON documents for towers, algebras, complexes, maps and problems.
//!
//! Documents serialize canonically: keys sorted, integers only, a `schema`
//! tag and a `version`. Parsing validates everything the library validates.

use std::sync::Arc;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{AlgMatrix, AlgebraKind, DeformedAlgebra, Level};
use crate::complex::{GradedMap, GradedObject, PreComplex};
use crate::crude::HomotopyEquivData;
use crate::error::{Error, Result};
use crate::finring::{FiniteRing, RingMap, Tower, TowerCaps, TowerKind};

pub const VERSION: u64 = 1;

/// Canonical text of a JSON value.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

/// Hex SHA-256 of a string.
pub fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

fn as_u64(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?.as_u64().ok_or_else(|| Error::Parse(format!("`{key}` must be a nonnegative integer")))
}

fn as_u32(v: &Value, key: &str) -> Result<u32> {
    u32::try_from(as_u64(v, key)?).map_err(|_| Error::Parse(format!("`{key}` is too large")))
}

fn as_i32(v: &Value, key: &str) -> Result<i32> {
    field(v, key)?
        .as_i64()
        .and_then(|x| i32::try_from(x).ok())
        .ok_or_else(|| Error::Parse(format!("`{key}` must be an integer")))
}

fn as_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| Error::Parse(format!("`{key}` must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn u32_list(v: &Value, what: &str) -> Result<Vec<u32>> {
    as_array(v, what)?
        .iter()
        .map(|x| x.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or_else(|| Error::Parse(format!("{what} must hold integers"))))
        .collect()
}

fn nested<T>(v: &Value, what: &str, f: impl Fn(&Value) -> Result<T>) -> Result<Vec<T>> {
    as_array(v, what)?.iter().map(f).collect()
}

fn ring_to_json(r: &FiniteRing) -> Value {
    json!({ "p": r.p(), "exps": r.exps(), "commutative": r.is_commutative(), "table": r.table() })
}

fn ring_from_json(v: &Value) -> Result<FiniteRing> {
    let p = as_u32(v, "p")?;
    let exps = u32_list(field(v, "exps")?, "exps")?;
    let commutative = field(v, "commutative")?.as_bool().ok_or_else(|| Error::Parse("`commutative` must be a boolean".into()))?;
    let table = nested(field(v, "table")?, "table", |row| nested(row, "table row", |e| u32_list(e, "table entry")))?;
    FiniteRing::new(p, exps, table, commutative)
}

fn images_from_json(v: &Value) -> Result<Vec<Vec<u32>>> {
    nested(v, "images", |e| u32_list(e, "image"))
}

pub fn tower_to_json(t: &Tower) -> Value {
    match &t.kind {
        TowerKind::Zmod { a, b } => json!({ "kind": "zmod", "p": t.p(), "a": a, "b": b }),
        TowerKind::TruncPoly { a, b } => json!({ "kind": "trunc_poly", "p": t.p(), "a": a, "b": b }),
        TowerKind::SquareZero { r } => json!({ "kind": "square_zero", "p": t.p(), "r": r }),
        TowerKind::Custom => json!({
            "kind": "custom",
            "bar": ring_to_json(&t.bar),
            "mid": ring_to_json(&t.mid),
            "base": ring_to_json(&t.base),
            "pi_bar": t.pi_bar.images,
            "pi": t.pi.images,
        }),
    }
}

pub fn tower_from_json(v: &Value) -> Result<Tower> {
    match as_str(v, "kind")? {
        "zmod" => Tower::zmod(as_u32(v, "p")?, as_u32(v, "a")?, as_u32(v, "b")?),
        "trunc_poly" => Tower::trunc_poly(as_u32(v, "p")?, as_u32(v, "a")?, as_u32(v, "b")?),
        "square_zero" => Tower::square_zero(as_u32(v, "p")?, as_u32(v, "r")?),
        "custom" => {
            let bar = Arc::new(ring_from_json(field(v, "bar")?)?);
            let mid = Arc::new(ring_from_json(field(v, "mid")?)?);
            let base = Arc::new(ring_from_json(field(v, "base")?)?);
            let pi_bar = RingMap::surjection(bar, mid.clone(), images_from_json(field(v, "pi_bar")?)?)?;
            let pi = RingMap::surjection(mid, base, images_from_json(field(v, "pi")?)?)?;
            Tower::from_maps(TowerKind::Custom, pi_bar, pi, TowerCaps::default())
        }
        other => Err(Error::Parse(format!("unknown tower kind `{other}`"))),
    }
}

pub fn algebra_to_json(a: &DeformedAlgebra) -> Value {
    let consts = match a.kind {
        AlgebraKind::Trivial => json!(a.base_consts()),
        AlgebraKind::Custom => json!(a.consts),
    };
    let kind = match a.kind {
        AlgebraKind::Trivial => "trivial",
        AlgebraKind::Custom => "custom",
    };
    json!({ "tower": tower_to_json(&a.tower), "kind": kind, "names": a.names, "consts": consts })
}

/// Sources for payloads that leave out their tower or algebra.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub tower: Option<Arc<Tower>>,
    pub algebra: Option<Arc<DeformedAlgebra>>,
}

pub fn algebra_from_json(v: &Value, ctx: &Context) -> Result<DeformedAlgebra> {
    let tower = match v.get("tower") {
        Some(t) => Arc::new(tower_from_json(t)?),
        None => ctx.tower.clone().ok_or_else(|| Error::Parse("algebra has no tower and none was given".into()))?,
    };
    let names: Vec<String> = nested(field(v, "names")?, "names", |n| {
        n.as_str().map(str::to_string).ok_or_else(|| Error::Parse("names must be strings".into()))
    })?;
    let consts = field(v, "consts")?;
    match as_str(v, "kind")? {
        "trivial" => {
            let c = nested(consts, "consts", |row| nested(row, "consts row", |e| u32_list(e, "consts entry")))?;
            DeformedAlgebra::trivial(tower, names, c)
        }
        "custom" => {
            let c = nested(consts, "consts", |row| nested(row, "consts row", |e| nested(e, "consts entry", |x| u32_list(x, "coefficients"))))?;
            DeformedAlgebra::custom(tower, names, c)
        }
        other => Err(Error::Parse(format!("unknown algebra kind `{other}`"))),
    }
}

fn matrix_to_json(m: &AlgMatrix) -> Value {
    Value::Array((0..m.rows).map(|r| Value::Array((0..m.cols).map(|c| json!(m.entry(r, c))).collect())).collect())
}

fn matrix_from_json(v: &Value, level: Level, ring: &FiniteRing, rows: usize, cols: usize) -> Result<AlgMatrix> {
    let rws = as_array(v, "matrix")?;
    if rws.len() != rows {
        return Err(Error::ShapeMismatch(format!("matrix has {} rows, expected {rows}", rws.len())));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in rws {
        let row = as_array(row, "matrix row")?;
        if row.len() != cols {
            return Err(Error::ShapeMismatch(format!("matrix row has {} entries, expected {cols}", row.len())));
        }
        for e in row {
            let x = u32_list(e, "matrix entry")?;
            if x.len() != ring.rank() || x.iter().zip(ring.moduli()).any(|(&c, &m)| c as u64 >= m) {
                return Err(Error::Validation(format!("entry {x:?} is not a reduced element of the {level} ring")));
            }
            entries.push(x);
        }
    }
    AlgMatrix::from_entries(level, ring, rows, cols, &entries)
}

pub fn map_to_json(f: &GradedMap) -> Value {
    json!({
        "level": f.level.to_string(),
        "degree": f.degree,
        "comps": f.comps.iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn map_from_json(v: &Value, alg: &DeformedAlgebra, src: &GradedObject, tgt: &GradedObject) -> Result<GradedMap> {
    let level = Level::parse(as_str(v, "level")?)?;
    if level != src.level {
        return Err(Error::LevelMismatch { expected: src.level.to_string(), found: level.to_string() });
    }
    let degree = as_i32(v, "degree")?;
    let ring = alg.ring(level);
    let comps_v = as_array(field(v, "comps")?, "comps")?;
    if comps_v.len() != src.ranks.len() {
        return Err(Error::ShapeMismatch(format!("{} components for a window of {} degrees", comps_v.len(), src.ranks.len())));
    }
    let comps = src
        .degrees()
        .zip(comps_v)
        .map(|(i, m)| matrix_from_json(m, level, ring, tgt.rank(i + degree), src.rank(i)))
        .collect::<Result<_>>()?;
    GradedMap::from_comps(src, tgt, degree, comps)
}

pub fn complex_to_json(c: &PreComplex) -> Value {
    json!({
        "level": c.obj.level.to_string(),
        "lo": c.obj.lo,
        "ranks": c.obj.ranks,
        "d": c.d.comps.iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

/// A pre-complex; `d² = 0` is not checked here.
pub fn complex_from_json(v: &Value, alg: &DeformedAlgebra) -> Result<PreComplex> {
    let level = Level::parse(as_str(v, "level")?)?;
    if level == Level::Free {
        return Err(Error::Validation("complexes live at the bar, mid or base level".into()));
    }
    let ranks: Vec<usize> = u32_list(field(v, "ranks")?, "ranks")?.into_iter().map(|x| x as usize).collect();
    let obj = GradedObject::new(level, as_i32(v, "lo")?, ranks);
    let d = map_from_json(&json!({ "level": level.to_string(), "degree": 1, "comps": field(v, "d")? }), alg, &obj, &obj)?;
    PreComplex::new(obj, d)
}

/// Payload of a `problem` document.
#[derive(Clone, Debug)]
pub enum ProblemPayload {
    Differential { complex: PreComplex },
    Map { source: PreComplex, target: PreComplex, map: GradedMap },
    Homotopy { source: PreComplex, target: PreComplex, homotopy: GradedMap, f: GradedMap, g: GradedMap },
    Equivalence { data: HomotopyEquivData, d_bar: GradedMap },
}

#[derive(Clone, Debug)]
pub enum Document {
    Tower(Arc<Tower>),
    Algebra(Arc<DeformedAlgebra>),
    Complex { alg: Arc<DeformedAlgebra>, complex: PreComplex },
    Map { alg: Arc<DeformedAlgebra>, source: PreComplex, target: PreComplex, map: GradedMap },
    Problem { alg: Arc<DeformedAlgebra>, problem: ProblemPayload },
}

impl Document {
    pub fn schema(&self) -> &'static str {
        match self {
            Document::Tower(_) => "tower",
            Document::Algebra(_) => "algebra",
            Document::Complex { .. } => "complex",
            Document::Map { .. } => "map",
            Document::Problem { .. } => "problem",
        }
    }

    pub fn algebra(&self) -> Option<&Arc<DeformedAlgebra>> {
        match self {
            Document::Tower(_) => None,
            Document::Algebra(a) => Some(a),
            Document::Complex { alg, .. } | Document::Map { alg, .. } | Document::Problem { alg, .. } => Some(alg),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = match self {
            Document::Tower(t) => tower_to_json(t),
            Document::Algebra(a) => algebra_to_json(a),
            Document::Complex { alg, complex } => {
                let mut v = complex_to_json(complex);
                v["algebra"] = algebra_to_json(alg);
                v
            }
            Document::Map { alg, source, target, map } => json!({
                "algebra": algebra_to_json(alg),
                "source": complex_to_json(source),
                "target": complex_to_json(target),
                "map": map_to_json(map),
            }),
            Document::Problem { alg, problem } => {
                let mut v = match problem {
                    ProblemPayload::Differential { complex } => json!({ "kind": "differential", "complex": complex_to_json(complex) }),
                    ProblemPayload::Map { source, target, map } => json!({
                        "kind": "map",
                        "source": complex_to_json(source),
                        "target": complex_to_json(target),
                        "map": map_to_json(map),
                    }),
                    ProblemPayload::Homotopy { source, target, homotopy, f, g } => json!({
                        "kind": "homotopy",
                        "source": complex_to_json(source),
                        "target": complex_to_json(target),
                        "homotopy": map_to_json(homotopy),
                        "f": map_to_json(f),
                        "g": map_to_json(g),
                    }),
                    ProblemPayload::Equivalence { data, d_bar } => json!({
                        "kind": "equivalence",
                        "source": complex_to_json(&data.c),
                        "target": complex_to_json(&data.d),
                        "f": map_to_json(&data.f),
                        "g": map_to_json(&data.g),
                        "h": map_to_json(&data.h),
                        "k": map_to_json(&data.k),
                        "d_bar": map_to_json(d_bar),
                    }),
                };
                v["algebra"] = algebra_to_json(alg);
                v
            }
        };
        obj["schema"] = json!(self.schema());
        obj["version"] = json!(VERSION);
        obj
    }

    pub fn to_text(&self) -> String {
        canonical(&self.to_json())
    }

    pub fn digest(&self) -> String {
        digest(&self.to_text())
    }

    pub fn parse(text: &str, ctx: &Context) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json(&v, ctx)
    }

    pub fn from_json(v: &Value, ctx: &Context) -> Result<Self> {
        if !v.is_object() {
            return Err(Error::Parse("document must be a JSON object".into()));
        }
        let version = as_u64(v, "version")?;
        if version != VERSION {
            return Err(Error::Parse(format!("unsupported version {version}")));
        }
        let schema = as_str(v, "schema")?;
        let algebra = |v: &Value| -> Result<Arc<DeformedAlgebra>> {
            match v.get("algebra") {
                Some(a) => Ok(Arc::new(algebra_from_json(a, ctx)?)),
                None => ctx.algebra.clone().ok_or_else(|| Error::Parse("document has no algebra and none was given".into())),
            }
        };
        let map_at = |alg: &DeformedAlgebra, key: &str, src: &GradedObject, tgt: &GradedObject, level: Level| -> Result<GradedMap> {
            map_from_json(field(v, key)?, alg, &src.at_level(level), &tgt.at_level(level))
        };
        match schema {
            "tower" => Ok(Document::Tower(Arc::new(tower_from_json(v)?))),
            "algebra" => Ok(Document::Algebra(Arc::new(algebra_from_json(v, ctx)?))),
            "complex" => {
                let alg = algebra(v)?;
                let complex = complex_from_json(v, &alg)?;
                if !complex.is_complex(alg.ring(complex.level()))? {
                    return Err(Error::Validation("d² ≠ 0: not a complex".into()));
                }
                Ok(Document::Complex { alg, complex })
            }
            "map" => {
                let alg = algebra(v)?;
                let source = complex_from_json(field(v, "source")?, &alg)?;
                let target = complex_from_json(field(v, "target")?, &alg)?;
                let level = Level::parse(as_str(field(v, "map")?, "level")?)?;
                let map = map_at(&alg, "map", &source.obj, &target.obj, level)?;
                Ok(Document::Map { alg, source, target, map })
            }
            "problem" => {
                let alg = algebra(v)?;
                let cx = |key: &str| complex_from_json(field(v, key)?, &alg);
                let problem = match as_str(v, "kind")? {
                    "differential" => ProblemPayload::Differential { complex: cx("complex")? },
                    "map" => {
                        let (source, target) = (cx("source")?, cx("target")?);
                        let level = Level::parse(as_str(field(v, "map")?, "level")?)?;
                        let map = map_at(&alg, "map", &source.obj, &target.obj, level)?;
                        ProblemPayload::Map { source, target, map }
                    }
                    "homotopy" => {
                        let (source, target) = (cx("source")?, cx("target")?);
                        let homotopy = map_at(&alg, "homotopy", &source.obj, &target.obj, Level::Mid)?;
                        let f = map_at(&alg, "f", &source.obj, &target.obj, Level::Bar)?;
                        let g = map_at(&alg, "g", &source.obj, &target.obj, Level::Bar)?;
                        ProblemPayload::Homotopy { source, target, homotopy, f, g }
                    }
                    "equivalence" => {
                        let (c, d) = (cx("source")?, cx("target")?);
                        let f = map_at(&alg, "f", &c.obj, &d.obj, Level::Mid)?;
                        let g = map_at(&alg, "g", &d.obj, &c.obj, Level::Mid)?;
                        let h = map_at(&alg, "h", &c.obj, &c.obj, Level::Mid)?;
                        let k = map_at(&alg, "k", &d.obj, &d.obj, Level::Mid)?;
                        let d_bar = map_at(&alg, "d_bar", &d.obj, &d.obj, Level::Bar)?;
                        let data = HomotopyEquivData::new(&alg.mid, c, d, f, g, h, k)?;
                        ProblemPayload::Equivalence { data, d_bar }
                    }
                    other => return Err(Error::Parse(format!("unknown problem kind `{other}`"))),
                };
                Ok(Document::Problem { alg, problem })
            }
            other => Err(Error::SchemaMismatch { expected: "tower|algebra|complex|map|problem".into(), found: other.into() }),
        }
    }
}

/// Keys of a JSON object in order, for tests of canonical form.
pub fn keys(v: &Value) -> Vec<String> {
    v.as_object().map(Map::keys).map(|k| k.cloned().collect()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4_complex_text() -> String {
        let t = Arc::new(Tower::zmod(2, 2, 1).unwrap());
        let a = Arc::new(DeformedAlgebra::scalars(t).unwrap());
        let c = PreComplex::zero(&a.mid, &GradedObject::new(Level::Mid, 0, vec![1, 1, 1]));
        Document::Complex { alg: a, complex: c }.to_text()
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let text = z4_complex_text();
        let doc = Document::parse(&text, &Context::default()).unwrap();
        assert_eq!(doc.to_text(), text);
        let v: Value = serde_json::from_str(&text).unwrap();
        let k = keys(&v);
        let mut sorted = k.clone();
        sorted.sort();
        assert_eq!(k, sorted);
    }

    #[test]
    fn custom_tower_with_nonzero_ij_is_rejected() {
        let bar = FiniteRing::truncated_poly(2, 3).unwrap();
        let k = FiniteRing::prime_field(2).unwrap();
        let v = json!({
            "schema": "tower", "version": 1, "kind": "custom",
            "bar": ring_to_json(&bar), "mid": ring_to_json(&k), "base": ring_to_json(&k),
            "pi_bar": [[1], [0], [0]], "pi": [[1]],
        });
        let err = Document::from_json(&v, &Context::default()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::IJNonzero { .. }));
        assert!(msg.contains("[0, 1, 0]"), "{msg}");
    }

    #[test]
    fn complex_schema_requires_square_zero() {
        let t = Arc::new(Tower::zmod(2, 2, 1).unwrap());
        let a = Arc::new(DeformedAlgebra::scalars(t).unwrap());
        let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
        let mut d = GradedMap::zero(&a.mid, &obj, &obj, 1);
        d.comps[0].set(0, 0, &[1]);
        d.comps[1].set(0, 0, &[1]);
        let c = PreComplex::new(obj, d).unwrap();
        let mut v = Document::Complex { alg: a.clone(), complex: c.clone() }.to_json();
        assert!(matches!(Document::from_json(&v, &Context::default()), Err(Error::Validation(_))));
        v["schema"] = json!("problem");
        let problem = Document::Problem { alg: a, problem: ProblemPayload::Differential { complex: c } }.to_json();
        assert!(Document::from_json(&problem, &Context::default()).is_ok());
    }

    #[test]
    fn algebra_can_come_from_context() {
        let text = z4_complex_text();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        let alg = v.as_object_mut().unwrap().remove("algebra").unwrap();
        assert!(Document::from_json(&v, &Context::default()).is_err());
        let a = Arc::new(algebra_from_json(&alg, &Context::default()).unwrap());
        let ctx = Context { tower: None, algebra: Some(a) };
        assert!(Document::from_json(&v, &ctx).is_ok());
    }

    #[test]
    fn rejects_unknown_schema_and_unreduced_entries() {
        let v = json!({ "schema": "nope", "version": 1 });
        assert!(matches!(Document::from_json(&v, &Context::default()), Err(Error::SchemaMismatch { .. })));
        let mut v: Value = serde_json::from_str(&z4_complex_text()).unwrap();
        v["d"][0] = json!([[[5]]]);
        assert!(Document::from_json(&v, &Context::default()).is_err());
    }
}
