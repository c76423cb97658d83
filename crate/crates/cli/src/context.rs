//! Settings shared by every subcommand, and output plumbing.

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context as _, Result};
use arithsphere::operators::{ArithmeticMeasure, Budget};
use arithsphere::shell_cache::load_or_enumerate;
use arithsphere::{enumerate_shell, DiagonalForm, SphereShell, Strategy};
use serde::Serialize;

pub struct Context {
    pub strategy: Strategy,
    pub cache: Option<PathBuf>,
    pub max_points: usize,
    pub budget: Budget,
    pub out: Option<PathBuf>,
}

impl Context {
    /// Full shell, through the cache when one is configured.
    pub fn shell(&self, form: DiagonalForm, lambda: u64) -> arithsphere::Result<SphereShell> {
        match &self.cache {
            Some(dir) => load_or_enumerate(dir, form, lambda, self.max_points),
            None => enumerate_shell(form, lambda, self.max_points),
        }
    }

    pub fn measure(
        &self,
        form: DiagonalForm,
        lambda: u64,
    ) -> arithsphere::Result<ArithmeticMeasure> {
        ArithmeticMeasure::new(self.shell(form, lambda)?)
    }

    pub fn writer(&self, append: bool) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => {
                let f = if append {
                    OpenOptions::new().create(true).append(true).open(path)
                } else {
                    File::create(path)
                }
                .with_context(|| format!("cannot open {}", path.display()))?;
                Box::new(BufWriter::new(f))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    /// Whether `--out` names a nonempty existing file.
    pub fn out_has_content(&self) -> bool {
        self.out
            .as_ref()
            .and_then(|p| std::fs::metadata(p).ok())
            .is_some_and(|m| m.len() > 0)
    }
}

/// `# config {...}`, the first line of every CSV output.
pub fn config_line<T: Serialize>(config: &T) -> Result<String> {
    Ok(format!("# config {}", serde_json::to_string(config)?))
}

/// Pretty JSON with the config under `"config"` and the payload's fields beside it.
pub fn json_output<C: Serialize, T: Serialize>(config: &C, payload: &T) -> Result<String> {
    let mut v = serde_json::to_value(payload)?;
    let cfg = serde_json::to_value(config)?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("config".into(), cfg);
        }
        None => v = serde_json::json!({ "config": cfg, "result": v }),
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}
