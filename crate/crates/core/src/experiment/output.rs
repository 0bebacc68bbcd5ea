use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::Report;

/// Round-trip exact float text: 17 significant digits in scientific form,
/// `NaN`, `inf` and `-inf` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty JSON with floats in [`format_float`] form. Non-finite floats
/// become `null` before reaching the formatter.
struct Fixed17(PrettyFormatter<'static>);

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize with 17 significant digits per float.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub const STEPS_HEADER: [&str; 6] = [
    "step_index",
    "length_i",
    "alpha_i",
    "lemma1_increment",
    "lemma2_increment",
    "cumulative_log_bound",
];

/// Per-step table; `alpha_i` is empty for one-dimensional engines.
pub fn steps_csv(report: &Report) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(STEPS_HEADER)?;
    for s in &report.result.trace.per_step {
        w.write_record([
            s.step_index.to_string(),
            format_float(s.length),
            s.alpha.map(format_float).unwrap_or_default(),
            format_float(s.lemma1_increment),
            format_float(s.lemma2_increment),
            format_float(s.cumulative_log_bound),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv writes UTF-8"))
}

/// Plot data: sample parameter against `log` of the derivative or tangent
/// norm ratio relative to the first sample.
pub fn profile_csv(report: &Report) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["parameter", "log_ratio"])?;
    for (t, l) in &report.result.profile {
        w.write_record([format_float(*t), format_float(*l)])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv writes UTF-8"))
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub report: PathBuf,
    pub steps: Option<PathBuf>,
    pub profile: Option<PathBuf>,
}

/// Write the JSON report and, unless `json_only`, the two CSV tables into `dir`.
pub fn write_outputs(report: &Report, dir: &Path, json_only: bool) -> io::Result<Written> {
    std::fs::create_dir_all(dir)?;
    let out = &report.config.output;
    let report_path = dir.join(&out.report);
    std::fs::write(&report_path, to_json(report).map_err(io::Error::other)?)?;
    let mut written = Written {
        report: report_path,
        steps: None,
        profile: None,
    };
    if !json_only {
        let steps = dir.join(&out.steps);
        std::fs::write(&steps, steps_csv(report).map_err(io::Error::other)?)?;
        let profile = dir.join(&out.profile);
        std::fs::write(&profile, profile_csv(report).map_err(io::Error::other)?)?;
        written.steps = Some(steps);
        written.profile = Some(profile);
    }
    Ok(written)
}
