//! Output serialization: JSON and CSV emission with a fixed float format,
//! written atomically (temp file + rename).

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Fixed float format used in every output: 17 significant digits, enough to
/// round-trip any f64 and stable across runs.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// serde_json formatter that prints every float with [`fmt_f64`].
struct SciNotation;

impl serde_json::ser::Formatter for SciNotation {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.7e}")
    }
}

/// Serialize to a JSON string with the fixed float format.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciNotation);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Run(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| CliError::Run(format!("non-utf8 output: {e}")))
}

/// Write bytes to `path` atomically: the content lands in a sibling temp file
/// first and is renamed into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let io_err = |e: io::Error| CliError::Run(format!("cannot write {}: {e}", path.display()));
    {
        let mut file = std::fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(content.as_bytes()).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

/// Incremental CSV builder with `#`-prefixed comment lines.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new() -> Self {
        Self { buf: String::new() }
    }

    pub fn comment(&mut self, text: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for field in fields {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(field.as_ref());
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
