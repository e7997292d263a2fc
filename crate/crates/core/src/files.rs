//! JSON documents: problems, points and affine pair sets, all tagged `"format": "mpcac-1"`.

use serde::{Deserialize, Serialize};

use crate::cones::PairSet;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::indices::Indices;
use crate::model::{PairPoint, Problem};

pub const FORMAT: &str = "mpcac-1";
pub const REPORT_FORMAT: &str = "mpcac-report-1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub format: String,
    pub name: String,
    pub n: usize,
    pub alpha: usize,
    pub objective: String,
    #[serde(default)]
    pub g: Vec<String>,
    #[serde(default)]
    pub h: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    #[serde(default = "default_format")]
    pub format: String,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

/// `{(x, y) : ineq <= 0, eq = 0, x*y = 0}`; rows are affine expressions over `2n` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSetDoc {
    pub format: String,
    pub kind: String,
    pub name: String,
    pub n: usize,
    #[serde(default)]
    pub ineq: Vec<String>,
    #[serde(default)]
    pub eq: Vec<String>,
}

fn default_format() -> String {
    FORMAT.to_string()
}

fn check_format(f: &str) -> Result<()> {
    if f == FORMAT {
        Ok(())
    } else {
        Err(Error::Format(format!("unsupported format `{f}`, expected `{FORMAT}`")))
    }
}

fn parse_all(texts: &[String], nvars: usize, what: &str) -> Result<Vec<Expr>> {
    texts
        .iter()
        .enumerate()
        .map(|(k, t)| parse_one(t, nvars, &format!("{what}{}", k + 1)))
        .collect()
}

fn parse_one(text: &str, nvars: usize, what: &str) -> Result<Expr> {
    parse_expr(text, nvars).map_err(|source| Error::Parse {
        context: what.to_string(),
        source,
    })
}

impl ProblemDoc {
    pub fn to_problem(&self) -> Result<Problem> {
        check_format(&self.format)?;
        let objective = parse_one(&self.objective, self.n, "objective")?;
        let g = parse_all(&self.g, self.n, "g")?;
        let h = parse_all(&self.h, self.n, "h")?;
        Problem::new(self.name.clone(), self.n, self.alpha, objective, g, h)
    }

    pub fn from_problem(p: &Problem) -> Self {
        ProblemDoc {
            format: FORMAT.into(),
            name: p.name.clone(),
            n: p.n,
            alpha: p.alpha,
            objective: p.objective.to_string(),
            g: p.g.iter().map(Expr::to_string).collect(),
            h: p.h.iter().map(Expr::to_string).collect(),
        }
    }
}

impl PairSetDoc {
    pub fn to_pair_set(&self) -> Result<PairSet> {
        check_format(&self.format)?;
        if self.kind != "pair-set" {
            return Err(Error::Format(format!("unknown document kind `{}`", self.kind)));
        }
        let ineq = parse_all(&self.ineq, 2 * self.n, "ineq")?;
        let eq = parse_all(&self.eq, 2 * self.n, "eq")?;
        PairSet::from_exprs(self.name.clone(), self.n, &ineq, &eq)
    }
}

impl PointDoc {
    pub fn to_point(&self) -> Result<PairPoint> {
        check_format(&self.format)?;
        match &self.y {
            Some(y) => PairPoint::new(self.x.clone(), y.clone()),
            None => Ok(PairPoint::x_only(self.x.clone())),
        }
    }

    pub fn from_point(pt: &PairPoint) -> Self {
        PointDoc {
            format: FORMAT.into(),
            x: pt.x.clone(),
            y: pt.y.clone(),
        }
    }
}

/// Either kind of model document.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Problem(Problem),
    PairSet(PairSet),
}

/// Parses a problem or pair-set document, dispatching on the `kind` field.
pub fn load_document(text: &str) -> Result<Document> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("kind").and_then(|k| k.as_str()) {
        Some("pair-set") => {
            let doc: PairSetDoc = serde_json::from_value(v)?;
            Ok(Document::PairSet(doc.to_pair_set()?))
        }
        Some(other) => Err(Error::Format(format!("unknown document kind `{other}`"))),
        None => {
            let doc: ProblemDoc = serde_json::from_value(v)?;
            Ok(Document::Problem(doc.to_problem()?))
        }
    }
}

pub fn load_problem(text: &str) -> Result<Problem> {
    match load_document(text)? {
        Document::Problem(p) => Ok(p),
        Document::PairSet(_) => Err(Error::Format("expected a problem, found a pair set".into())),
    }
}

pub fn problem_json(p: &Problem) -> String {
    serde_json::to_string_pretty(&ProblemDoc::from_problem(p)).expect("plain data serializes")
}

pub fn load_point(text: &str) -> Result<PairPoint> {
    serde_json::from_str::<PointDoc>(text)?.to_point()
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("`{}` is not a number", t.trim())))
        })
        .collect()
}

/// Parses `"x=0,0;y=1,0"` (the `y` part is optional).
pub fn parse_point_spec(spec: &str) -> Result<PairPoint> {
    let mut x = None;
    let mut y = None;
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, vals) = part
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("expected `x=...` or `y=...`, got `{part}`")))?;
        let slot = match key.trim() {
            "x" => &mut x,
            "y" => &mut y,
            k => return Err(Error::Format(format!("unknown point component `{k}`"))),
        };
        if slot.is_some() {
            return Err(Error::Format(format!("component `{}` given twice", key.trim())));
        }
        *slot = Some(parse_numbers(vals)?);
    }
    let x = x.ok_or_else(|| Error::Format("point has no `x=` component".into()))?;
    match y {
        Some(y) => PairPoint::new(x, y),
        None => Ok(PairPoint::x_only(x)),
    }
}

/// Parses a 1-based index list such as `"1,3"`; the empty string is the empty set.
pub fn parse_index_list(s: &str) -> Result<Indices> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    if s.trim().is_empty() {
        return Ok(Indices::empty());
    }
    let labels = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Format(format!("`{t}` is not an index")))
        })
        .collect::<Result<Vec<_>>>()?;
    Indices::from_one_based(&labels)
        .ok_or_else(|| Error::Format("index lists are 1-based; 0 is not allowed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = r#"{"format":"mpcac-1","name":"t","n":2,"alpha":1,
        "objective":"(+ x1 x2)","g":["(+ (neg x1) (^ x2 2))"],"h":[]}"#;

    #[test]
    fn problem_round_trip() {
        let p = load_problem(EX).unwrap();
        assert_eq!((p.n, p.alpha, p.g.len()), (2, 1, 1));
        let again = load_problem(&problem_json(&p)).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn rejects_bad_documents() {
        let alpha = EX.replace("\"alpha\":1", "\"alpha\":2");
        let err = load_problem(&alpha).unwrap_err().to_string();
        assert!(err.contains("strictly smaller than n"), "{err}");
        let fmt = EX.replace("mpcac-1", "mpcac-0");
        assert!(matches!(load_problem(&fmt), Err(Error::Format(_))));
        let syntax = EX.replace("(+ x1 x2)", "(+ x1 x2");
        assert!(matches!(load_problem(&syntax), Err(Error::Parse { .. })));
        let extra = EX.replace("\"h\":[]", "\"h\":[],\"q\":1");
        assert!(matches!(load_problem(&extra), Err(Error::Json(_))));
    }

    #[test]
    fn pair_set_document() {
        let doc = r#"{"format":"mpcac-1","kind":"pair-set","name":"s","n":1,
            "ineq":["(neg x1)","(neg x2)","(+ (neg x1) x2)"]}"#;
        match load_document(doc).unwrap() {
            Document::PairSet(s) => assert_eq!(s.ineq.len(), 3),
            d => panic!("{d:?}"),
        }
        let bad = doc.replace("(neg x2)", "(* x1 x2)");
        assert!(matches!(load_document(&bad), Err(Error::NonlinearConstraint(_))));
    }

    #[test]
    fn point_specs() {
        let pt = parse_point_spec("x=0,0;y=1,0").unwrap();
        assert_eq!(pt.y.as_deref(), Some(&[1.0, 0.0][..]));
        assert!(parse_point_spec("x=1, -2.5").unwrap().y.is_none());
        assert!(parse_point_spec("y=1").is_err());
        assert!(parse_point_spec("x=1;y=1,2").is_err());
        assert!(parse_point_spec("x=a").is_err());
        let doc = load_point(r#"{"x":[1,2],"y":[0,0]}"#).unwrap();
        assert_eq!(doc.x, vec![1.0, 2.0]);
    }

    #[test]
    fn index_lists() {
        assert_eq!(parse_index_list("1,3").unwrap(), Indices::new(vec![0, 2]));
        assert_eq!(parse_index_list("{1, 3}").unwrap(), Indices::new(vec![0, 2]));
        assert!(parse_index_list("").unwrap().is_empty());
        assert!(parse_index_list("0").is_err());
        assert!(parse_index_list("x").is_err());
    }
}
