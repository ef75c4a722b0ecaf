//! Experiment configuration: a flat TOML document, validated with every
//! problem reported at once rather than stopping at the first.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use toml::Value;

use crate::geometry::body::ConvexBody;
use crate::geometry::vec::{normalize, V};
use crate::law::CapacityLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Flow-constant estimate in one direction.
    Nu,
    /// Flow to infinity of a body over a schedule of scales.
    Flow,
    /// Convergence table with surface-energy reference columns.
    Converge,
    /// Deviation-tail frequency table.
    Tail,
    /// Minimal-cutset statistics.
    Cutset,
    /// Wulff crystal from per-direction estimates.
    Wulff,
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nu" => Ok(Self::Nu),
            "flow" => Ok(Self::Flow),
            "converge" => Ok(Self::Converge),
            "tail" => Ok(Self::Tail),
            "cutset" => Ok(Self::Cutset),
            "wulff" => Ok(Self::Wulff),
            other => Err(format!(
                "unknown experiment kind {other:?}; expected nu, flow, converge, tail, cutset or wulff"
            )),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Nu => "nu",
            Self::Flow => "flow",
            Self::Converge => "converge",
            Self::Tail => "tail",
            Self::Cutset => "cutset",
            Self::Wulff => "wulff",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    UnknownKey,
    TypeMismatch,
    ConstraintViolation,
}

/// One validation problem, addressed by key path.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigIssue {
    pub kind: IssueKind,
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at `{}`: {}", self.kind, self.location, self.message)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl BodySpec {
    pub fn to_body(&self, d: usize) -> ConvexBody {
        fn pad(v: &[f64]) -> V {
            let mut out = [0.0; 3];
            for (k, x) in v.iter().enumerate().take(3) {
                out[k] = *x;
            }
            out
        }
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(pad(center), *radius, d),
            BodySpec::Box { lo, hi } => ConvexBody::box_at(pad(lo), pad(hi), d),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: usize,
    pub direction: Option<V>,
    pub body: Option<BodySpec>,
    pub law: CapacityLaw,
    pub n_schedule: Vec<i64>,
    pub h: f64,
    pub eps: Option<f64>,
    /// Directions for the Wulff construction.
    pub directions: usize,
    pub replicas: u64,
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

pub const DEFAULT_REPLICAS: u64 = 32;
pub const DEFAULT_HEIGHT: f64 = 1.0;

struct Checker<'a> {
    root: &'a toml::Table,
    issues: Vec<ConfigIssue>,
}

impl<'a> Checker<'a> {
    fn push(&mut self, kind: IssueKind, location: &str, message: String) {
        self.issues.push(ConfigIssue {
            kind,
            location: location.to_string(),
            message,
        });
    }

    fn f64_at(&mut self, table: &toml::Table, path: &str, key: &str) -> Option<f64> {
        let loc = join(path, key);
        match table.get(key) {
            None => None,
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(x)) => Some(*x as f64),
            Some(other) => {
                self.push(
                    IssueKind::TypeMismatch,
                    &loc,
                    format!("expected a number, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn u64_at(&mut self, table: &toml::Table, path: &str, key: &str) -> Option<u64> {
        let loc = join(path, key);
        match table.get(key) {
            None => None,
            Some(Value::Integer(x)) if *x >= 0 => Some(*x as u64),
            Some(Value::Integer(x)) => {
                self.push(
                    IssueKind::ConstraintViolation,
                    &loc,
                    format!("must be nonnegative, found {x}"),
                );
                None
            }
            Some(other) => {
                self.push(
                    IssueKind::TypeMismatch,
                    &loc,
                    format!("expected an integer, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn str_at(&mut self, table: &toml::Table, path: &str, key: &str) -> Option<String> {
        let loc = join(path, key);
        match table.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.push(
                    IssueKind::TypeMismatch,
                    &loc,
                    format!("expected a string, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn f64_list_at(&mut self, table: &toml::Table, path: &str, key: &str) -> Option<Vec<f64>> {
        let loc = join(path, key);
        match table.get(key) {
            None => None,
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        other => {
                            self.push(
                                IssueKind::TypeMismatch,
                                &format!("{loc}[{i}]"),
                                format!("expected a number, found {}", other.type_str()),
                            );
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(other) => {
                self.push(
                    IssueKind::TypeMismatch,
                    &loc,
                    format!("expected an array, found {}", other.type_str()),
                );
                None
            }
        }
    }

    fn reject_unknown(&mut self, table: &toml::Table, path: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                self.push(
                    IssueKind::UnknownKey,
                    &join(path, key),
                    format!("unknown key; expected one of {known:?}"),
                );
            }
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn parse_law(c: &mut Checker, table: &toml::Table) -> Option<CapacityLaw> {
    let kind = c.str_at(table, "law", "kind")?;
    let law = match kind.as_str() {
        "constant" => {
            c.reject_unknown(table, "law", &["kind", "c"]);
            CapacityLaw::Constant {
                c: c.f64_at(table, "law", "c")?,
            }
        }
        "bernoulli_scaled" => {
            c.reject_unknown(table, "law", &["kind", "p", "value"]);
            CapacityLaw::BernoulliScaled {
                p: c.f64_at(table, "law", "p")?,
                value: c.f64_at(table, "law", "value")?,
            }
        }
        "uniform" => {
            c.reject_unknown(table, "law", &["kind", "a", "b"]);
            CapacityLaw::Uniform {
                a: c.f64_at(table, "law", "a")?,
                b: c.f64_at(table, "law", "b")?,
            }
        }
        "exponential" => {
            c.reject_unknown(table, "law", &["kind", "rate"]);
            CapacityLaw::Exponential {
                rate: c.f64_at(table, "law", "rate")?,
            }
        }
        "finite_discrete" => {
            c.reject_unknown(table, "law", &["kind", "atoms"]);
            let atoms = match table.get("atoms") {
                Some(Value::Array(rows)) => {
                    let mut out = Vec::new();
                    for (i, row) in rows.iter().enumerate() {
                        match row {
                            Value::Array(pair) if pair.len() == 2 => {
                                let get = |v: &Value| match v {
                                    Value::Float(x) => Some(*x),
                                    Value::Integer(x) => Some(*x as f64),
                                    _ => None,
                                };
                                match (get(&pair[0]), get(&pair[1])) {
                                    (Some(v), Some(p)) => out.push((v, p)),
                                    _ => {
                                        c.push(
                                            IssueKind::TypeMismatch,
                                            &format!("law.atoms[{i}]"),
                                            "expected a [value, probability] number pair".into(),
                                        );
                                        return None;
                                    }
                                }
                            }
                            _ => {
                                c.push(
                                    IssueKind::TypeMismatch,
                                    &format!("law.atoms[{i}]"),
                                    "expected a [value, probability] pair".into(),
                                );
                                return None;
                            }
                        }
                    }
                    out
                }
                Some(other) => {
                    c.push(
                        IssueKind::TypeMismatch,
                        "law.atoms",
                        format!("expected an array, found {}", other.type_str()),
                    );
                    return None;
                }
                None => {
                    c.push(
                        IssueKind::ConstraintViolation,
                        "law.atoms",
                        "finite_discrete law requires atoms".into(),
                    );
                    return None;
                }
            };
            CapacityLaw::FiniteDiscrete { atoms }
        }
        other => {
            c.push(
                IssueKind::ConstraintViolation,
                "law.kind",
                format!("unknown law kind {other:?}"),
            );
            return None;
        }
    };
    if let Err(e) = law.check() {
        c.push(IssueKind::ConstraintViolation, "law", e.to_string());
        return None;
    }
    Some(law)
}

fn parse_body(c: &mut Checker, table: &toml::Table, d: usize) -> Option<BodySpec> {
    let kind = c.str_at(table, "body", "kind")?;
    let check_dim = |c: &mut Checker, loc: &str, v: &[f64]| {
        if v.len() != d {
            c.push(
                IssueKind::ConstraintViolation,
                loc,
                format!("expected {d} coordinates, found {}", v.len()),
            );
            false
        } else {
            true
        }
    };
    match kind.as_str() {
        "ball" => {
            c.reject_unknown(table, "body", &["kind", "center", "radius"]);
            let center = c.f64_list_at(table, "body", "center")?;
            let radius = c.f64_at(table, "body", "radius")?;
            if !check_dim(c, "body.center", &center) {
                return None;
            }
            if radius <= 0.0 {
                c.push(
                    IssueKind::ConstraintViolation,
                    "body.radius",
                    "must be > 0".into(),
                );
                return None;
            }
            Some(BodySpec::Ball { center, radius })
        }
        "box" => {
            c.reject_unknown(table, "body", &["kind", "lo", "hi"]);
            let lo = c.f64_list_at(table, "body", "lo")?;
            let hi = c.f64_list_at(table, "body", "hi")?;
            if !check_dim(c, "body.lo", &lo) || !check_dim(c, "body.hi", &hi) {
                return None;
            }
            if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                c.push(
                    IssueKind::ConstraintViolation,
                    "body",
                    "box needs lo < hi on every axis".into(),
                );
                return None;
            }
            Some(BodySpec::Box { lo, hi })
        }
        other => {
            c.push(
                IssueKind::ConstraintViolation,
                "body.kind",
                format!("unknown body kind {other:?}; expected ball or box"),
            );
            None
        }
    }
}

/// Parses and validates a config document for the given experiment kind,
/// collecting every problem.
pub fn parse_config(
    kind: ExperimentKind,
    text: &str,
) -> std::result::Result<ExperimentConfig, Vec<ConfigIssue>> {
    let root: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![ConfigIssue {
                kind: IssueKind::TypeMismatch,
                location: "(document)".into(),
                message: e.to_string(),
            }]);
        }
    };
    let mut c = Checker {
        root: &root,
        issues: Vec::new(),
    };
    c.reject_unknown(
        c.root,
        "",
        &[
            "kind",
            "d",
            "direction",
            "n",
            "h",
            "eps",
            "directions",
            "replicas",
            "master_seed",
            "workers",
            "out",
            "body",
            "law",
        ],
    );

    if let Some(stated) = c.str_at(&root, "", "kind") {
        match stated.parse::<ExperimentKind>() {
            Ok(k) if k == kind => {}
            Ok(k) => c.push(
                IssueKind::ConstraintViolation,
                "kind",
                format!("config says {k} but the command asked for {kind}"),
            ),
            Err(e) => c.push(IssueKind::ConstraintViolation, "kind", e),
        }
    }

    let d = match c.u64_at(&root, "", "d") {
        Some(x) if (2..=3).contains(&x) => x as usize,
        Some(x) => {
            c.push(
                IssueKind::ConstraintViolation,
                "d",
                format!("dimension must be 2 or 3, found {x}"),
            );
            2
        }
        None => 2,
    };

    let direction = match c.f64_list_at(&root, "", "direction") {
        Some(v) => {
            if v.len() != d {
                c.push(
                    IssueKind::ConstraintViolation,
                    "direction",
                    format!("expected {d} coordinates, found {}", v.len()),
                );
                None
            } else {
                let mut padded = [0.0; 3];
                for (k, x) in v.iter().enumerate() {
                    padded[k] = *x;
                }
                match normalize(padded) {
                    Some(u) => Some(u),
                    None => {
                        c.push(
                            IssueKind::ConstraintViolation,
                            "direction",
                            "direction must be nonzero".into(),
                        );
                        None
                    }
                }
            }
        }
        None => None,
    };

    let n_schedule: Vec<i64> = match root.get("n") {
        Some(Value::Integer(x)) if *x >= 1 => vec![*x],
        Some(Value::Array(_)) => {
            let xs = c.f64_list_at(&root, "", "n").unwrap_or_default();
            let mut out = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                if x.fract() != 0.0 || *x < 1.0 {
                    c.push(
                        IssueKind::ConstraintViolation,
                        &format!("n[{i}]"),
                        format!("scales must be integers >= 1, found {x}"),
                    );
                } else {
                    out.push(*x as i64);
                }
            }
            out
        }
        Some(other) => {
            c.push(
                IssueKind::TypeMismatch,
                "n",
                format!("expected an integer or array, found {}", other.type_str()),
            );
            Vec::new()
        }
        None => Vec::new(),
    };
    if n_schedule.is_empty() {
        c.push(
            IssueKind::ConstraintViolation,
            "n",
            "schedule of scales must be nonempty".into(),
        );
    } else if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        c.push(
            IssueKind::ConstraintViolation,
            "n",
            "schedule must be strictly increasing".into(),
        );
    }

    let h = c.f64_at(&root, "", "h").unwrap_or(DEFAULT_HEIGHT);
    if h <= 0.0 {
        c.push(IssueKind::ConstraintViolation, "h", "must be > 0".into());
    }
    let eps = c.f64_at(&root, "", "eps");
    if let Some(e) = eps {
        if e <= 0.0 {
            c.push(IssueKind::ConstraintViolation, "eps", "must be > 0".into());
        }
    }
    let directions = match c.u64_at(&root, "", "directions") {
        Some(m) if m >= 2 * d as u64 => m as usize,
        Some(m) => {
            c.push(
                IssueKind::ConstraintViolation,
                "directions",
                format!("need at least {} directions, found {m}", 2 * d),
            );
            2 * d
        }
        None => 2 * d,
    };
    let replicas = c.u64_at(&root, "", "replicas").unwrap_or(DEFAULT_REPLICAS);
    if replicas == 0 {
        c.push(
            IssueKind::ConstraintViolation,
            "replicas",
            "must be >= 1".into(),
        );
    }
    let master_seed = c.u64_at(&root, "", "master_seed").unwrap_or(0);
    let workers = c.u64_at(&root, "", "workers").map(|w| w as usize);
    if workers == Some(0) {
        c.push(
            IssueKind::ConstraintViolation,
            "workers",
            "must be >= 1".into(),
        );
    }
    let out_dir = c.str_at(&root, "", "out").map(PathBuf::from);

    let law = match root.get("law") {
        Some(Value::Table(t)) => {
            let t = t.clone();
            parse_law(&mut c, &t)
        }
        Some(other) => {
            c.push(
                IssueKind::TypeMismatch,
                "law",
                format!("expected a table, found {}", other.type_str()),
            );
            None
        }
        None => {
            c.push(
                IssueKind::ConstraintViolation,
                "law",
                "a capacity law is required".into(),
            );
            None
        }
    };

    let body = match root.get("body") {
        Some(Value::Table(t)) => {
            let t = t.clone();
            parse_body(&mut c, &t, d)
        }
        Some(other) => {
            c.push(
                IssueKind::TypeMismatch,
                "body",
                format!("expected a table, found {}", other.type_str()),
            );
            None
        }
        None => None,
    };

    // per-kind requirements
    match kind {
        ExperimentKind::Nu => {
            if direction.is_none() && !c.issues.iter().any(|i| i.location == "direction") {
                c.push(
                    IssueKind::ConstraintViolation,
                    "direction",
                    "nu experiments need a direction".into(),
                );
            }
        }
        ExperimentKind::Flow | ExperimentKind::Converge | ExperimentKind::Cutset => {
            if body.is_none() && !c.issues.iter().any(|i| i.location.starts_with("body")) {
                c.push(
                    IssueKind::ConstraintViolation,
                    "body",
                    format!("{kind} experiments need a body"),
                );
            }
        }
        ExperimentKind::Tail => {
            if body.is_none() && !c.issues.iter().any(|i| i.location.starts_with("body")) {
                c.push(
                    IssueKind::ConstraintViolation,
                    "body",
                    "tail experiments need a body".into(),
                );
            }
            if eps.is_none() && !c.issues.iter().any(|i| i.location == "eps") {
                c.push(
                    IssueKind::ConstraintViolation,
                    "eps",
                    "tail experiments need a relative deviation eps".into(),
                );
            }
        }
        ExperimentKind::Wulff => {}
    }

    if !c.issues.is_empty() {
        return Err(c.issues);
    }
    Ok(ExperimentConfig {
        kind,
        d,
        direction,
        body,
        law: law.expect("validated"),
        n_schedule,
        h,
        eps,
        directions,
        replicas,
        master_seed,
        workers,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_nu_config_fills_defaults() {
        let cfg = parse_config(
            ExperimentKind::Nu,
            r#"
direction = [1.0, 0.0]
n = [8]
[law]
kind = "constant"
c = 1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.replicas, 32);
        assert_eq!(cfg.h, 1.0);
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.n_schedule, vec![8]);
    }

    #[test]
    fn unknown_key_reported_at_location() {
        let err = parse_config(
            ExperimentKind::Nu,
            r#"
direction = [1.0, 0.0]
n = [8]
foo = 3
[law]
kind = "constant"
c = 1.0
"#,
        )
        .unwrap_err();
        assert!(err
            .iter()
            .any(|i| i.kind == IssueKind::UnknownKey && i.location == "foo"));
    }

    #[test]
    fn empty_schedule_is_a_constraint_violation() {
        let err = parse_config(
            ExperimentKind::Nu,
            r#"
direction = [1.0, 0.0]
n = []
[law]
kind = "constant"
c = 1.0
"#,
        )
        .unwrap_err();
        assert!(err
            .iter()
            .any(|i| i.kind == IssueKind::ConstraintViolation && i.location == "n"));
    }

    #[test]
    fn all_errors_reported_not_just_first() {
        let err = parse_config(
            ExperimentKind::Tail,
            r#"
n = []
h = -1.0
replicas = 0
bogus = true
[law]
kind = "constant"
c = -2.0
"#,
        )
        .unwrap_err();
        let locations: Vec<&str> = err.iter().map(|i| i.location.as_str()).collect();
        for want in ["n", "h", "replicas", "bogus", "law", "body", "eps"] {
            assert!(locations.contains(&want), "missing issue at {want}: {err:?}");
        }
    }

    #[test]
    fn type_mismatch_reported() {
        let err = parse_config(
            ExperimentKind::Nu,
            r#"
direction = "east"
n = [8]
[law]
kind = "constant"
c = 1.0
"#,
        )
        .unwrap_err();
        assert!(err
            .iter()
            .any(|i| i.kind == IssueKind::TypeMismatch && i.location == "direction"));
    }

    #[test]
    fn mismatched_kind_rejected() {
        let err = parse_config(
            ExperimentKind::Nu,
            r#"
kind = "flow"
direction = [1.0, 0.0]
n = [8]
[law]
kind = "constant"
c = 1.0
"#,
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.location == "kind"));
    }

    #[test]
    fn body_roundtrip() {
        let cfg = parse_config(
            ExperimentKind::Converge,
            r#"
n = [4, 8]
[body]
kind = "box"
lo = [0.0, 0.0]
hi = [1.0, 1.0]
[law]
kind = "bernoulli_scaled"
p = 0.9
value = 1.0
"#,
        )
        .unwrap();
        let body = cfg.body.as_ref().unwrap().to_body(cfg.d);
        assert!(body.contains([0.5, 0.5, 0.0], 0.0));
        assert!(!body.contains([1.5, 0.5, 0.0], 0.0));
    }
}
