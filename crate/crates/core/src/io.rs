//! JSONL score files, the segment-scorer line protocol and JSON outputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::score_model::{ScoreSeries, Segmentation, SentenceRecord};
use crate::scorer::SegmentScorer;

/// One line of a score file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreFileRecord {
    pub idx: usize,
    pub score: f64,
    pub n_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl ScoreFileRecord {
    pub fn from_record<T: Real>(r: &SentenceRecord<T>) -> Self {
        Self {
            idx: r.index,
            score: r.score.to_f64_lossy(),
            n_tokens: r.token_count,
            var: r.var_estimate.map(|v| v.to_f64_lossy()),
            text: r.text.clone(),
        }
    }

    pub fn to_record<T: Real>(&self) -> SentenceRecord<T> {
        SentenceRecord {
            index: self.idx,
            score: T::lit(self.score),
            token_count: self.n_tokens,
            var_estimate: self.var.map(T::lit),
            text: self.text.clone(),
        }
    }
}

fn schema(line: usize, field: &'static str, message: impl Into<String>) -> Error {
    Error::Schema {
        line,
        field,
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, line: usize, name: &'static str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| schema(line, name, "missing"))
}

fn finite_number(v: &Value, line: usize, name: &'static str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(schema(
            line,
            name,
            format!("expected a finite number, got {v}"),
        )),
    }
}

/// Validates one parsed line. `line` is 1-based.
fn parse_record(value: Value, line: usize, expected_idx: usize) -> Result<ScoreFileRecord> {
    let obj = match value {
        Value::Object(m) => m,
        other => {
            return Err(Error::Parse {
                line,
                message: format!("expected a JSON object, got {other}"),
            })
        }
    };
    let idx = field(&obj, line, "idx")?
        .as_u64()
        .ok_or_else(|| schema(line, "idx", "expected a non-negative integer"))?
        as usize;
    if idx != expected_idx {
        return Err(schema(
            line,
            "idx",
            format!("expected {expected_idx}, got {idx}"),
        ));
    }
    let score = finite_number(field(&obj, line, "score")?, line, "score")?;
    let n_tokens = field(&obj, line, "n_tokens")?
        .as_u64()
        .filter(|&n| n >= 1 && n <= u32::MAX as u64)
        .ok_or_else(|| schema(line, "n_tokens", "expected a positive integer"))?
        as u32;
    let var = match obj.get("var") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let x = finite_number(v, line, "var")?;
            if x <= 0.0 {
                return Err(schema(line, "var", format!("must be positive, got {x}")));
            }
            Some(x)
        }
    };
    let text = match obj.get("text") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(v) => return Err(schema(line, "text", format!("expected a string, got {v}"))),
    };
    Ok(ScoreFileRecord {
        idx,
        score,
        n_tokens,
        var,
        text,
    })
}

/// Reads score records from JSONL. Blank lines are skipped.
pub fn read_score_records<R: Read>(reader: R) -> Result<Vec<ScoreFileRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(parse_record(value, line_no, out.len())?);
    }
    Ok(out)
}

pub fn read_scores<T: Real, R: Read>(reader: R) -> Result<ScoreSeries<T>> {
    let records = read_score_records(reader)?;
    ScoreSeries::new(records.iter().map(ScoreFileRecord::to_record).collect())
}

pub fn load_scores<T: Real>(path: impl AsRef<Path>) -> Result<ScoreSeries<T>> {
    read_scores(File::open(path)?)
}

pub fn write_scores_to<T: Real, W: Write>(series: &ScoreSeries<T>, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for r in series.records() {
        serde_json::to_writer(&mut w, &ScoreFileRecord::from_record(r))
            .map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores<T: Real>(series: &ScoreSeries<T>, path: impl AsRef<Path>) -> Result<()> {
    write_scores_to(series, File::create(path)?)
}

/// Request line sent to a segment scorer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerRequest {
    pub op: String,
    pub start: usize,
    pub end: usize,
}

impl ScorerRequest {
    pub fn segment_score(start: usize, end: usize) -> Self {
        Self {
            op: "segment_score".into(),
            start,
            end,
        }
    }
}

/// Response line: `{"score": x}` or `{"error": "..."}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScorerResponse {
    Score { score: f64 },
    Error { error: String },
}

/// Segment scorer speaking the line protocol with a child process.
///
/// The command runs under `sh -c`; its stderr is inherited.
pub struct ProcessScorer {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    len: usize,
    requests: usize,
}

impl ProcessScorer {
    pub fn spawn(command: &str, len: usize) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::ScorerFailure(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self {
            child,
            stdin: BufWriter::new(stdin),
            stdout: BufReader::new(stdout),
            len,
            requests: 0,
        })
    }

    pub fn requests(&self) -> usize {
        self.requests
    }

    fn exchange(&mut self, req: &ScorerRequest) -> Result<ScorerResponse> {
        let fail = |what: &str, e: &dyn std::fmt::Display| {
            Error::ScorerFailure(format!("{what} for [{}, {}]: {e}", req.start, req.end))
        };
        let mut line = serde_json::to_string(req).expect("request serializes");
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| fail("write failed", &e))?;
        self.requests += 1;
        let mut reply = String::new();
        let read = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| fail("read failed", &e))?;
        if read == 0 {
            return Err(fail("no response", &"scorer closed its output"));
        }
        serde_json::from_str(reply.trim_end()).map_err(|e| fail("malformed response", &e))
    }
}

impl SegmentScorer<f64> for ProcessScorer {
    fn len(&self) -> usize {
        self.len
    }

    fn segment_score(&mut self, start: usize, end: usize) -> Result<f64> {
        if start > end || end >= self.len {
            return Err(Error::ScorerFailure(format!(
                "range [{start}, {end}] outside 0..{}",
                self.len
            )));
        }
        match self.exchange(&ScorerRequest::segment_score(start, end))? {
            ScorerResponse::Score { score } if score.is_finite() => Ok(score),
            ScorerResponse::Score { score } => Err(Error::ScorerFailure(format!(
                "non-finite score {score} for [{start}, {end}]"
            ))),
            ScorerResponse::Error { error } => Err(Error::ScorerFailure(format!(
                "scorer reported for [{start}, {end}]: {error}"
            ))),
        }
    }
}

impl Drop for ProcessScorer {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Reads a segmentation from any JSON object carrying `change_points` (0-based)
/// and `n`, such as a segment output file.
pub fn read_segmentation<R: Read>(reader: R) -> Result<Segmentation> {
    #[derive(Deserialize)]
    struct Raw {
        change_points: Vec<usize>,
        n: usize,
    }
    let raw: Raw = serde_json::from_reader(reader).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    Segmentation::new(raw.change_points, raw.n)
}

pub fn load_segmentation(path: impl AsRef<Path>) -> Result<Segmentation> {
    read_segmentation(File::open(path)?)
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<V: Serialize, W: Write>(value: &V, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
