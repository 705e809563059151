use std::path::{Path, PathBuf};
use std::sync::Arc;

use deflift::algebra::{DeformedAlgebra, Level};
use deflift::cli::{run, Outcome};
use deflift::complex::{GradedMap, GradedObject, PreComplex};
use deflift::crude::contractible_extension;
use deflift::doc::{Document, ProblemPayload};
use deflift::finring::Tower;
use deflift::oracle::matrix_of;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn call(args: &[&str]) -> Outcome {
    run(std::iter::once("deflift").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

fn write(dir: &Path, name: &str, doc: &Document) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, doc.to_text()).unwrap();
    path
}

fn z4() -> Arc<DeformedAlgebra> {
    Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::zmod(2, 2, 1).unwrap())).unwrap())
}

/// Differential with the given scalar in each slot of a rank-one window.
fn scalar_d(alg: &DeformedAlgebra, level: Level, entries: &[u32]) -> PreComplex {
    let obj = GradedObject::new(level, 0, vec![1; entries.len() + 1]);
    let mut comps: Vec<_> = entries.iter().map(|&x| matrix_of(alg, level, 1, 1, &[vec![x]]).unwrap()).collect();
    comps.push(matrix_of(alg, level, 0, 1, &[]).unwrap());
    PreComplex::new(obj.clone(), GradedMap::from_comps(&obj, &obj, 1, comps).unwrap()).unwrap()
}

fn t_squared(entries: &[u32]) -> (Arc<DeformedAlgebra>, PreComplex) {
    let alg = Arc::new(DeformedAlgebra::scalars(Arc::new(Tower::trunc_poly(2, 3, 2).unwrap())).unwrap());
    let obj = GradedObject::new(Level::Mid, 0, vec![1; entries.len() + 1]);
    let mut comps: Vec<_> = entries.iter().map(|&x| matrix_of(&alg, Level::Mid, 1, 1, &[vec![0, x]]).unwrap()).collect();
    comps.push(matrix_of(&alg, Level::Mid, 0, 1, &[]).unwrap());
    let d = GradedMap::from_comps(&obj, &obj, 1, comps).unwrap();
    (alg.clone(), PreComplex::complex(&alg.mid, obj, d).unwrap())
}

#[test]
fn classify_z4() {
    let dir = tempfile::tempdir().unwrap();
    let a = z4();
    let c = scalar_d(&a, Level::Mid, &[0, 0]);
    let f = write(dir.path(), "z4.json", &Document::Complex { alg: a, complex: c });
    let out = call(&["classify", f.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["verdict"], "classified");
    assert_eq!(v["result"]["torsor"]["count"], "4");
    assert_eq!(v["result"]["torsor"]["h_dim"], 2);
    assert!(out.stderr.contains("elapsed"));

    let out = call(&["obstruct-diff", "--complex", f.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert_eq!(json(&out)["obstruction"]["zero"], true);

    let out = call(&["oracle", f.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    let v = json(&out);
    assert_eq!(v["agrees"], true);
    assert_eq!(v["classes"], 4);
}

#[test]
fn obstructed_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let t = Arc::new(Tower::square_zero(2, 1).unwrap());
    let (one, zero) = (vec![1, 0], vec![0, 0]);
    let consts = vec![
        vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one]],
        vec![vec![zero.clone(), vec![1, 0]], vec![vec![0, 1], zero]],
    ];
    let a = Arc::new(DeformedAlgebra::custom(t, vec!["1".into(), "x".into()], consts).unwrap());
    let obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
    let x = matrix_of(&a, Level::Mid, 1, 1, &[vec![0, 1]]).unwrap();
    let d = GradedMap::from_comps(&obj, &obj, 1, vec![x.clone(), x, matrix_of(&a, Level::Mid, 0, 1, &[]).unwrap()]).unwrap();
    let c = PreComplex::complex(&a.mid, obj, d).unwrap();
    let f = write(dir.path(), "mf.json", &Document::Complex { alg: a, complex: c });
    for cmd in ["obstruct-diff", "lift-diff", "classify", "classify-homotopy"] {
        let out = call(&[cmd, f.to_str().unwrap()]);
        assert_eq!(out.code, 2, "{cmd}");
        assert_eq!(json(&out)["verdict"], "obstructed");
    }
    let out = call(&["oracle", f.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert_eq!(json(&out)["lifts"], 0);
}

#[test]
fn map_and_homotopy_lifting() {
    let dir = tempfile::tempdir().unwrap();
    let a = z4();
    let zero = scalar_d(&a, Level::Bar, &[0, 0]);
    let twos = scalar_d(&a, Level::Bar, &[2, 2]);
    let mid_obj = GradedObject::new(Level::Mid, 0, vec![1, 1, 1]);
    let id = GradedMap::identity(&a.mid, &mid_obj);
    let same = Document::Map { alg: a.clone(), source: zero.clone(), target: zero.clone(), map: id.clone() };
    let out = call(&["lift-map", write(dir.path(), "same.json", &same).to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let other = Document::Map { alg: a.clone(), source: zero.clone(), target: twos, map: id };
    let out = call(&["lift-map", "--map", write(dir.path(), "other.json", &other).to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert_eq!(json(&out)["result"]["obstruction"]["zero"], false);

    let bar_id = GradedMap::identity(&a.bar, &zero.obj);
    let h = GradedMap::zero(&a.mid, &mid_obj, &mid_obj, -1);
    let problem = Document::Problem {
        alg: a.clone(),
        problem: ProblemPayload::Homotopy { source: zero.clone(), target: zero, homotopy: h, f: bar_id.clone(), g: bar_id },
    };
    let f = write(dir.path(), "htpy.json", &problem);
    let out = call(&["lift-homotopy", f.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["result"]["torsor"]["degree"], -1);
    let out = call(&["oracle", f.to_str().unwrap()]);
    assert_eq!(json(&out)["agrees"], true);
}

#[test]
fn crude_lift_command() {
    let dir = tempfile::tempdir().unwrap();
    let a = z4();
    let c_bar = scalar_d(&a, Level::Bar, &[2, 0]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = contractible_extension(&a, &c_bar, &[(0, 1), (1, 1)], 5, &mut rng).unwrap();
    let doc = Document::Problem { alg: a, problem: ProblemPayload::Equivalence { data: inst.data, d_bar: inst.d_bar_d } };
    let f = write(dir.path(), "equiv.json", &doc);
    let out = call(&["crude-lift", f.to_str().unwrap(), "--trace"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(v["verdict"], "lifts");
    let stages: Vec<&str> = v["trace"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["start", "i", "ii", "iii", "iv", "v"]);
}

#[test]
fn functor_commands() {
    let dir = tempfile::tempdir().unwrap();
    let a = z4();
    let c = scalar_d(&a, Level::Base, &[0, 0]);
    let f = write(dir.path(), "base.json", &Document::Complex { alg: a, complex: c });
    let path = f.to_str().unwrap();
    let out = call(&["tangent", path]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["tangent_dim"], 2);
    let out = call(&["functor-eval", path, "--ring", "k[e]", "--functor", "F"]);
    assert_eq!(json(&out)["count"], 4);
    let out = call(&["functor-eval", path, "--ring", "k", "--functor", "F"]);
    assert_eq!(json(&out)["count"], 1);
    let out = call(&["functor-eval", path, "--ring", "k[e]", "--functor", "F1", "--cross-check"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["cross_checked"], true);
    let out = call(&["schlessinger", path]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["triples"].as_array().unwrap().len(), 3);
}

#[test]
fn extend_order_command() {
    let dir = tempfile::tempdir().unwrap();
    let (a, c) = t_squared(&[1, 1]);
    let f = write(dir.path(), "tt.json", &Document::Complex { alg: a, complex: c });
    let out = call(&["extend-order", f.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    let v = json(&out);
    assert_eq!(v["order"], 3);
    assert_eq!(v["result"]["obstruction_h_dim"], 1);

    let (a, c) = t_squared(&[1, 0]);
    let f = write(dir.path(), "t0.json", &Document::Complex { alg: a, complex: c });
    let out = call(&["extend-order", f.to_str().unwrap(), "--to", "5"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["order"], 5);
}

#[test]
fn out_flag_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let g = call(&["gen", "--seed", "3"]);
    assert_eq!(g.code, 0);
    let input = dir.path().join("g.json");
    std::fs::write(&input, &g.stdout).unwrap();
    let report = dir.path().join("r.json");
    let out = call(&["lift-diff", input.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.ends_with('\n'));
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap()["schema"], "report");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = call(&["classify", bad.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert_eq!(json(&out)["verdict"], "failed");

    let out = call(&["frobnicate"]);
    assert_eq!(out.code, 1);
    let out = call(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("classify"));
}

#[test]
fn custom_tower_error_names_pair() {
    let dir = tempfile::tempdir().unwrap();
    // F2[t]/t^3 -> F2 -> F2 has I = J = (t, t^2) and t * t != 0
    let doc = r#"{
        "schema": "tower", "version": 1, "kind": "custom",
        "bar": {"p": 2, "exps": [1, 1, 1], "commutative": true, "table": [
            [[1,0,0],[0,1,0],[0,0,1]],
            [[0,1,0],[0,0,1],[0,0,0]],
            [[0,0,1],[0,0,0],[0,0,0]]]},
        "mid": {"p": 2, "exps": [1], "commutative": true, "table": [[[1]]]},
        "base": {"p": 2, "exps": [1], "commutative": true, "table": [[[1]]]},
        "pi_bar": [[1], [0], [0]],
        "pi": [[1]]
    }"#;
    let tower = dir.path().join("tower.json");
    std::fs::write(&tower, doc).unwrap();
    let alg = dir.path().join("alg.json");
    std::fs::write(&alg, r#"{"schema":"algebra","version":1,"kind":"trivial","names":["1"],"consts":[[[1]]]}"#).unwrap();
    let out = call(&["classify", "--tower", tower.to_str().unwrap(), "--algebra", alg.to_str().unwrap(), "--complex", alg.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("[0, 1, 0]"), "{}", out.stderr);
}
