use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub struct Sink {
    w: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let w: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink { w })
    }

    pub fn line(&mut self, s: &str) -> Result<(), CliError> {
        self.w.write_all(s.as_bytes())?;
        self.w.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush()?;
        Ok(())
    }

    /// Little-endian f64 stream, no header.
    pub fn binary(mut self, values: &[f64]) -> Result<(), CliError> {
        for v in values {
            self.w.write_all(&v.to_le_bytes())?;
        }
        self.finish()
    }

    /// Pretty JSON; refuses non-finite numbers rather than emitting `null`.
    pub fn json(mut self, value: &serde_json::Value) -> Result<(), CliError> {
        if has_non_finite(value) {
            return Err(CliError::Numerical("result contains a non-finite number; refusing to write JSON".to_string()));
        }
        serde_json::to_writer_pretty(&mut self.w, value).map_err(io::Error::from)?;
        self.line("")?;
        self.finish()
    }
}

fn has_non_finite(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(has_non_finite),
        serde_json::Value::Object(o) => o.values().any(has_non_finite),
        _ => false,
    }
}
