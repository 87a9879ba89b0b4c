//! CSV loading with attribute coding, per-class score statistics and a
//! seeded synthetic generator.
//!
//! Input files are comma-separated with a header row: an id column, a score
//! column and one column per protected attribute. A [`CodingConfig`] maps
//! raw attribute values to short codes; a candidate's class label is its
//! codes concatenated in config order.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_instance, Candidate, Instance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Exact string match against any listed value.
    Values(Vec<String>),
    /// Numeric value within `[min, max]`.
    Range { min: f64, max: f64 },
}

impl Matcher {
    fn matches(&self, raw: &str) -> bool {
        match self {
            Matcher::Values(vs) => vs.iter().any(|v| v == raw),
            Matcher::Range { min, max } => raw
                .parse::<f64>()
                .map(|x| *min <= x && x <= *max)
                .unwrap_or(false),
        }
    }

    fn overlaps(&self, other: &Matcher) -> bool {
        match (self, other) {
            (Matcher::Values(a), Matcher::Values(b)) => a.iter().any(|v| b.contains(v)),
            (Matcher::Range { min: a0, max: a1 }, Matcher::Range { min: b0, max: b1 }) => {
                a0 <= b1 && b0 <= a1
            }
            (Matcher::Values(vs), r @ Matcher::Range { .. })
            | (r @ Matcher::Range { .. }, Matcher::Values(vs)) => vs.iter().any(|v| r.matches(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub code: String,
    pub matcher: Matcher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeCoding {
    pub source_column: String,
    /// Empty means the raw value is used as the code.
    #[serde(default)]
    pub bins: Vec<Bin>,
}

impl AttributeCoding {
    fn code(&self, raw: &str) -> Option<String> {
        if self.bins.is_empty() {
            return Some(raw.to_string());
        }
        self.bins
            .iter()
            .find(|b| b.matcher.matches(raw))
            .map(|b| b.code.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingConfig {
    pub id_column: String,
    pub score_column: String,
    pub attributes: Vec<AttributeCoding>,
}

impl CodingConfig {
    /// Every attribute column is taken verbatim.
    pub fn passthrough(id_column: &str, score_column: &str, columns: &[&str]) -> Self {
        CodingConfig {
            id_column: id_column.to_string(),
            score_column: score_column.to_string(),
            attributes: columns
                .iter()
                .map(|c| AttributeCoding {
                    source_column: c.to_string(),
                    bins: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CodingConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for attr in &self.attributes {
            let mut codes = HashSet::new();
            for (i, bin) in attr.bins.iter().enumerate() {
                if !codes.insert(bin.code.as_str()) {
                    return Err(Error::InvalidCoding(format!(
                        "column `{}`: duplicate code `{}`",
                        attr.source_column, bin.code
                    )));
                }
                if let Matcher::Range { min, max } = bin.matcher {
                    if !(min <= max) {
                        return Err(Error::InvalidCoding(format!(
                            "column `{}`: empty range [{min}, {max}] for code `{}`",
                            attr.source_column, bin.code
                        )));
                    }
                }
                if let Some(other) = attr.bins[..i].iter().find(|o| o.matcher.overlaps(&bin.matcher)) {
                    return Err(Error::InvalidCoding(format!(
                        "column `{}`: bins `{}` and `{}` overlap",
                        attr.source_column, other.code, bin.code
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn attribute_columns(&self) -> Vec<&str> {
        self.attributes.iter().map(|a| a.source_column.as_str()).collect()
    }
}

pub fn load_csv(path: impl AsRef<Path>, coding: &CodingConfig) -> Result<Instance> {
    let file = std::fs::File::open(path)?;
    read_csv(file, coding)
}

pub fn read_csv<R: Read>(reader: R, coding: &CodingConfig) -> Result<Instance> {
    coding.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = column(&coding.id_column)?;
    let score_col = column(&coding.score_column)?;
    let attr_cols = coding
        .attributes
        .iter()
        .map(|a| column(&a.source_column))
        .collect::<Result<Vec<_>>>()?;

    let mut candidates = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let raw_score = &record[score_col];
        let score: f64 = raw_score.trim().parse().map_err(|_| Error::BadScore {
            line,
            value: raw_score.to_string(),
        })?;
        let mut attributes = Vec::with_capacity(attr_cols.len());
        for (attr, &col) in coding.attributes.iter().zip(&attr_cols) {
            let raw = record[col].trim();
            let code = attr.code(raw).ok_or_else(|| Error::UnmatchedValue {
                line,
                column: attr.source_column.clone(),
                value: raw.to_string(),
            })?;
            attributes.push(code);
        }
        candidates.push(Candidate::new(&record[id_col], score, attributes));
    }
    build_instance(candidates)
}

/// Writes `id,score,<attribute columns...>` with each candidate's attribute
/// codes. Rows follow class order, best first within a class.
pub fn write_csv<W: Write>(instance: &Instance, attribute_columns: &[&str], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id", "score"];
    header.extend_from_slice(attribute_columns);
    w.write_record(&header)?;
    for c in instance.candidates() {
        let mut rec = vec![c.id.clone(), c.score.to_string()];
        rec.extend(c.attributes.iter().cloned());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub label: String,
    pub size: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile by linear interpolation between order statistics of `sorted`
/// (ascending).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn class_stats(instance: &Instance) -> Vec<ClassStats> {
    instance
        .classes()
        .iter()
        .map(|class| {
            let mut asc = class.utilities().to_vec();
            asc.reverse();
            let mean = asc.iter().sum::<f64>() / asc.len() as f64;
            ClassStats {
                label: class.label().to_string(),
                size: class.size(),
                mean,
                min: asc[0],
                q1: quantile(&asc, 0.25),
                median: quantile(&asc, 0.5),
                q3: quantile(&asc, 0.75),
                max: asc[asc.len() - 1],
            }
        })
        .collect()
}

pub fn write_stats_csv<W: Write>(stats: &[ClassStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "size", "mean", "min", "q1", "median", "q3", "max"])?;
    for s in stats {
        w.write_record([
            s.label.clone(),
            s.size.to_string(),
            s.mean.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: String,
    pub size: usize,
    pub score_mean: f64,
    pub score_stddev: f64,
}

fn default_floor() -> f64 {
    0.0
}

fn default_cap() -> f64 {
    850.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub class_specs: Vec<ClassSpec>,
    #[serde(default = "default_floor")]
    pub score_floor: f64,
    #[serde(default = "default_cap")]
    pub score_cap: f64,
    pub seed: u64,
}

/// Column written by [`generate_synthetic`] output: the class label.
pub const SYNTHETIC_CLASS_COLUMN: &str = "class";

const CALIBRATED_SPEC: &str = include_str!("../configs/synthetic_12class.json");

const MAX_REJECTIONS: usize = 1_000_000;

impl SyntheticSpec {
    /// The checked-in illustrative 12-class calibration (n = 10,000).
    pub fn calibrated() -> Self {
        Self::from_json(CALIBRATED_SPEC).expect("bundled spec is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_specs.is_empty() {
            return Err(Error::InvalidSpec("no classes".into()));
        }
        if !(self.score_floor < self.score_cap) {
            return Err(Error::InvalidSpec(format!(
                "score_floor {} must be below score_cap {}",
                self.score_floor, self.score_cap
            )));
        }
        let mut labels = HashSet::new();
        for c in &self.class_specs {
            if c.size == 0 {
                return Err(Error::InvalidSpec(format!("class `{}` has size 0", c.label)));
            }
            if !(c.score_stddev > 0.0) || !c.score_stddev.is_finite() || !c.score_mean.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "class `{}` needs a finite mean and a positive stddev",
                    c.label
                )));
            }
            if !labels.insert(c.label.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate label `{}`", c.label)));
            }
        }
        Ok(())
    }

    pub fn total_size(&self) -> usize {
        self.class_specs.iter().map(|c| c.size).sum()
    }
}

/// Draws each class's scores from a normal truncated to `[floor, cap]` by
/// rejection, rounded to 0.01. Candidates carry their class label as their
/// single attribute.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.total_size().to_string().len().max(5);
    let mut candidates = Vec::with_capacity(spec.total_size());
    let mut next_id = 0usize;
    for class in &spec.class_specs {
        let normal = Normal::new(class.score_mean, class.score_stddev)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        for _ in 0..class.size {
            let score = draw_truncated(&normal, spec.score_floor, spec.score_cap, &mut rng)
                .ok_or_else(|| {
                    Error::InvalidSpec(format!(
                        "class `{}`: distribution has too little mass in [{}, {}]",
                        class.label, spec.score_floor, spec.score_cap
                    ))
                })?;
            candidates.push(Candidate::new(
                format!("s{next_id:0width$}"),
                score,
                vec![class.label.clone()],
            ));
            next_id += 1;
        }
    }
    build_instance(candidates)
}

fn draw_truncated<R: Rng>(normal: &Normal<f64>, floor: f64, cap: f64, rng: &mut R) -> Option<f64> {
    for _ in 0..MAX_REJECTIONS {
        let x = normal.sample(rng);
        if floor <= x && x <= cap {
            let rounded = ((x * 100.0).round() / 100.0).clamp(floor, cap);
            return Some(rounded);
        }
    }
    None
}

/// Writes a generated instance in the format [`load_csv`] reads with
/// [`synthetic_coding`].
pub fn write_synthetic_csv<W: Write>(instance: &Instance, out: W) -> Result<()> {
    write_csv(instance, &[SYNTHETIC_CLASS_COLUMN], out)
}

pub fn synthetic_coding() -> CodingConfig {
    CodingConfig::passthrough("id", "score", &[SYNTHETIC_CLASS_COLUMN])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> CodingConfig {
        CodingConfig::from_json(include_str!("../configs/table1_coding.json")).unwrap()
    }

    #[test]
    fn decile_bins() {
        let cfg = table1();
        let income = &cfg.attributes[0];
        assert_eq!(income.code("4").as_deref(), Some("2"));
        assert_eq!(income.code("3").as_deref(), Some("1"));
        assert_eq!(income.code("10").as_deref(), Some("3"));
        assert_eq!(income.code("11"), None);
    }

    #[test]
    fn single_row_file() {
        let csv = "id,score,class\nx,700,1Aa\n";
        let inst = read_csv(csv.as_bytes(), &synthetic_coding()).unwrap();
        assert_eq!(inst.num_classes(), 1);
        assert_eq!(inst.sizes(), vec![1]);
    }

    #[test]
    fn load_errors_are_specific() {
        let cfg = synthetic_coding();
        let missing = read_csv("id,points,class\nx,1,a\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(missing, Error::MissingColumn(c) if c == "score"));

        let bad = read_csv("id,score,class\nx,1,a\ny,abc,a\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(bad, Error::BadScore { line: 3, ref value } if value == "abc"));

        let unmatched = read_csv(
            "id,score,income_decile,school_type,region\nx,1,12,private,high\n".as_bytes(),
            &table1(),
        )
        .unwrap_err();
        match unmatched {
            Error::UnmatchedValue { line, column, value } => {
                assert_eq!(line, 2);
                assert_eq!(column, "income_decile");
                assert_eq!(value, "12");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coding_validation() {
        let overlap = r#"{"id_column":"id","score_column":"score","attributes":[
            {"source_column":"d","bins":[
                {"code":"1","matcher":{"range":{"min":1,"max":4}}},
                {"code":"2","matcher":{"range":{"min":4,"max":6}}}]}]}"#;
        assert!(matches!(CodingConfig::from_json(overlap), Err(Error::InvalidCoding(_))));
        let dup = r#"{"id_column":"id","score_column":"score","attributes":[
            {"source_column":"s","bins":[
                {"code":"A","matcher":{"values":["x"]}},
                {"code":"A","matcher":{"values":["y"]}}]}]}"#;
        assert!(matches!(CodingConfig::from_json(dup), Err(Error::InvalidCoding(_))));
    }

    #[test]
    fn stats_simple_cases() {
        let cfg = synthetic_coding();
        let inst = read_csv(
            "id,score,class\na,700,x\nb,800,x\nc,5,y\nd,5,y\ne,5,y\n".as_bytes(),
            &cfg,
        )
        .unwrap();
        let stats = class_stats(&inst);
        assert_eq!(stats[0].mean, 750.0);
        assert_eq!(stats[0].median, 750.0);
        assert_eq!(stats[0].q1, 725.0);
        assert_eq!(stats[1].mean, 5.0);
        assert_eq!(stats[1].min, 5.0);
        assert_eq!(stats[1].max, 5.0);
    }

    #[test]
    fn quantile_type7() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.25), 1.75);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 0.75), 3.25);
        assert_eq!(quantile(&[9.0], 0.5), 9.0);
    }

    #[test]
    fn synthetic_is_seeded_and_bounded() {
        let spec = SyntheticSpec {
            class_specs: vec![ClassSpec {
                label: "x".into(),
                size: 200,
                score_mean: 840.0,
                score_stddev: 30.0,
            }],
            score_floor: 0.0,
            score_cap: 850.0,
            seed: 3,
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.candidates().all(|c| c.score <= 850.0 && c.score >= 0.0));
        assert!(a
            .candidates()
            .all(|c| ((c.score * 100.0).round() - c.score * 100.0).abs() < 1e-6));
    }

    #[test]
    fn tiny_stddev_concentrates() {
        let spec = SyntheticSpec {
            class_specs: vec![ClassSpec {
                label: "x".into(),
                size: 50,
                score_mean: 600.0,
                score_stddev: 1e-6,
            }],
            score_floor: 0.0,
            score_cap: 850.0,
            seed: 1,
        };
        let inst = generate_synthetic(&spec).unwrap();
        assert!(inst.candidates().all(|c| c.score == 600.0));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SyntheticSpec::calibrated();
        spec.score_cap = spec.score_floor;
        assert!(spec.validate().is_err());
        let mut spec = SyntheticSpec::calibrated();
        spec.class_specs[0].score_stddev = 0.0;
        assert!(spec.validate().is_err());
    }
}
