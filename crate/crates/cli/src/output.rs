use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// Optional line-delimited JSON sink behind `--out`.
pub struct Sink(Option<BufWriter<File>>);

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Sink, String> {
        match path {
            None => Ok(Sink(None)),
            Some(p) => File::create(p)
                .map(|f| Sink(Some(BufWriter::new(f))))
                .map_err(|e| format!("{}: {e}", p.display())),
        }
    }

    pub fn emit(&mut self, value: &impl Serialize) -> Result<(), String> {
        if let Some(w) = &mut self.0 {
            let line = serde_json::to_string(value).map_err(|e| e.to_string())?;
            writeln!(w, "{line}").map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), String> {
        if let Some(mut w) = self.0 {
            w.flush().map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}
