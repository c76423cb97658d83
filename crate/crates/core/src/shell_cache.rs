//! Plain-text shell cache.
//!
//! ```text
//! form d=<d> k=<k> lambda=<λ> count=<N>
//! <y_1> <y_2> ... <y_d>        (one line per point, full mode only)
//! ```
//!
//! Files are named `shell_d<d>_k<k>_l<λ>.txt`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_shell, DiagonalForm, SphereShell};

pub fn shell_file_name(form: DiagonalForm, lambda: u64) -> String {
    format!(
        "shell_d{}_k{}_l{}.txt",
        form.dimension(),
        form.degree(),
        lambda
    )
}

pub fn header_line(shell: &SphereShell) -> String {
    let form = shell.form();
    format!(
        "form d={} k={} lambda={} count={}",
        form.dimension(),
        form.degree(),
        shell.lambda(),
        shell.count()
    )
}

pub fn write_shell<W: Write>(shell: &SphereShell, mut out: W) -> Result<()> {
    writeln!(out, "{}", header_line(shell))?;
    for p in shell.points() {
        let line: Vec<String> = p.iter().map(i64::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Writes `shell` into `dir` under its content-addressed name and returns the path.
pub fn store_shell(dir: &Path, shell: &SphereShell) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(shell_file_name(shell.form(), shell.lambda()));
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        write_shell(shell, &mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

fn parse_header(line: &str) -> Result<(DiagonalForm, u64, u128)> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some("form") {
        return Err(Error::parse(1, "header must start with `form`"));
    }
    let mut get = |key: &str| -> Result<String> {
        let f = fields
            .next()
            .ok_or_else(|| Error::parse(1, format!("missing `{key}=`")))?;
        f.strip_prefix(&format!("{key}="))
            .map(str::to_owned)
            .ok_or_else(|| Error::parse(1, format!("expected `{key}=`, found `{f}`")))
    };
    let num = |key: &str, v: String| -> Result<u128> {
        v.parse::<u128>()
            .map_err(|e| Error::parse(1, format!("bad {key}: {e}")))
    };
    let d = num("d", get("d")?)? as usize;
    let k = num("k", get("k")?)? as u32;
    let lambda = num("lambda", get("lambda")?)? as u64;
    let count = num("count", get("count")?)?;
    let form = DiagonalForm::new(d, k).map_err(|e| Error::parse(1, e.to_string()))?;
    Ok((form, lambda, count))
}

/// Reads a cache file, checking that every point lies on the shell and that the
/// point count matches the header when points are present.
pub fn read_shell<R: BufRead>(input: R) -> Result<SphereShell> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty shell file"))??;
    let (form, lambda, count) = parse_header(&header)?;
    let d = form.dimension();
    let mut pts = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<i64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|e| Error::parse(lineno, format!("bad coordinate `{t}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if p.len() != d {
            return Err(Error::parse(
                lineno,
                format!("expected {d} coordinates, found {}", p.len()),
            ));
        }
        if form.eval(&p) != lambda as u128 {
            return Err(Error::parse(
                lineno,
                format!("point {p:?} is not on the shell"),
            ));
        }
        pts.extend(p);
    }
    let points = if pts.is_empty() && count > 0 {
        None
    } else {
        if (pts.len() / d) as u128 != count {
            return Err(Error::parse(
                1,
                format!("header count {count} but {} points listed", pts.len() / d),
            ));
        }
        Some(pts)
    };
    Ok(SphereShell::from_parts(form, lambda, count, points))
}

/// Returns the cached full shell if present, otherwise enumerates and stores it.
pub fn load_or_enumerate(
    dir: &Path,
    form: DiagonalForm,
    lambda: u64,
    cap: usize,
) -> Result<SphereShell> {
    let path = dir.join(shell_file_name(form, lambda));
    if path.exists() {
        let shell = read_shell(BufReader::new(fs::File::open(&path)?))?;
        if shell.is_full() || shell.count() == 0 {
            return Ok(shell);
        }
    }
    let shell = enumerate_shell(form, lambda, cap)?;
    store_shell(dir, &shell)?;
    Ok(shell)
}
