//! JSON reports emitted by the command line tool.

use serde_json::{json, Map, Value};

use crate::cohomology::CohClass;
use crate::doc::{map_to_json, VERSION};
use crate::obstruction::{GuardStatus, LiftReport, Torsor};

pub const TOOL: &str = "deflift";

/// Outcome of a command, which also fixes the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Lifts,
    Obstructed,
    Classified,
    Verified,
    Generated,
    Failed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Lifts => "lifts",
            Verdict::Obstructed => "obstructed",
            Verdict::Classified => "classified",
            Verdict::Verified => "verified",
            Verdict::Generated => "generated",
            Verdict::Failed => "failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Obstructed => 2,
            Verdict::Failed => 1,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, verdict: Verdict) -> Self {
        Report { command: command.to_string(), verdict, fields: Map::new() }
    }

    pub fn set(&mut self, key: &str, v: Value) -> &mut Self {
        self.fields.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj = self.fields.clone();
        obj.insert("schema".into(), json!("report"));
        obj.insert("version".into(), json!(VERSION));
        obj.insert("tool".into(), json!(TOOL));
        obj.insert("command".into(), json!(self.command));
        obj.insert("verdict".into(), json!(self.verdict.as_str()));
        Value::Object(obj)
    }
}

pub fn class_json(c: &CohClass) -> Value {
    json!({ "degree": c.degree, "coords": c.rep, "zero": c.is_zero() })
}

pub fn torsor_json(t: &Torsor) -> Value {
    json!({
        "degree": t.degree,
        "h_dim": t.h_dim,
        "count": t.count.to_string(),
        "guaranteed": t.guaranteed,
        "representatives": t.representatives.iter().map(map_to_json).collect::<Vec<_>>(),
        "differences": t.differences.iter().map(class_json).collect::<Vec<_>>(),
    })
}

pub fn lift_json(r: &LiftReport) -> Value {
    json!({
        "obstruction": class_json(&r.obstruction),
        "obstruction_h_dim": r.obstruction_h_dim,
        "witness": r.witness.as_ref().map(map_to_json),
        "torsor": r.torsor.as_ref().map(torsor_json),
    })
}

pub fn guard_json(g: &GuardStatus) -> Value {
    match g {
        GuardStatus::Vanishes => json!({ "status": "vanishes" }),
        GuardStatus::NonZero { cocycles, coboundaries } => json!({
            "status": "nonzero",
            "cocycles": cocycles.to_string(),
            "coboundaries": coboundaries.to_string(),
        }),
        GuardStatus::Undecided { size } => json!({ "status": "undecided", "size": size.to_string() }),
    }
}

pub fn lift_verdict(r: &LiftReport) -> Verdict {
    if r.lifts() {
        Verdict::Lifts
    } else {
        Verdict::Obstructed
    }
}
