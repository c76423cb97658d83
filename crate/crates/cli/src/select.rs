//! λ selections: `25`, `1,5,9`, `10..20`, `odd:49..401`, `dyadic:5`, `odd:dyadic:3..6`.

use anyhow::{bail, Context, Result};

const MAX_SELECTED: usize = 1 << 20;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parity {
    Any,
    Odd,
    Even,
}

impl Parity {
    fn keeps(self, n: u64) -> bool {
        match self {
            Parity::Any => true,
            Parity::Odd => n % 2 == 1,
            Parity::Even => n.is_multiple_of(2),
        }
    }
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .with_context(|| format!("`{s}` is not a nonnegative integer"))
}

fn range(s: &str) -> Result<(u64, u64)> {
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse_u64(a)?, parse_u64(b)?);
            if a > b {
                bail!("empty range {a}..{b}");
            }
            Ok((a, b))
        }
        None => {
            let a = parse_u64(s)?;
            Ok((a, a))
        }
    }
}

fn item(s: &str, out: &mut Vec<u64>) -> Result<()> {
    let (parity, rest) = match s.split_once(':') {
        Some(("odd", r)) => (Parity::Odd, r),
        Some(("even", r)) => (Parity::Even, r),
        _ => (Parity::Any, s),
    };
    let (lo, hi) = match rest.strip_prefix("dyadic:") {
        Some(js) => {
            let (j0, j1) = range(js)?;
            if j1 >= 63 {
                bail!("dyadic block 2^{j1} is too large");
            }
            (1u64 << j0, (1u64 << (j1 + 1)) - 1)
        }
        None => range(rest)?,
    };
    if hi - lo >= MAX_SELECTED as u64 * 2 {
        bail!("selection `{s}` is too large");
    }
    out.extend((lo..=hi).filter(|&n| parity.keeps(n)));
    Ok(())
}

/// Sorted, deduplicated positive λ.
pub fn parse_lambdas(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        item(part.trim(), &mut out).with_context(|| format!("bad lambda selection `{s}`"))?;
        if out.len() > MAX_SELECTED {
            bail!("lambda selection `{s}` selects more than {MAX_SELECTED} values");
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("lambda selection `{s}` is empty");
    }
    if out[0] == 0 {
        bail!("lambda must be positive");
    }
    Ok(out)
}

/// Comma-separated integers.
pub fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .with_context(|| format!("bad integer `{t}` in `{s}`"))
        })
        .collect()
}

/// Comma-separated reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{t}` in `{s}`"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selections() {
        assert_eq!(parse_lambdas("25").unwrap(), vec![25]);
        assert_eq!(parse_lambdas("9,1,5,5").unwrap(), vec![1, 5, 9]);
        assert_eq!(parse_lambdas("odd:3..9").unwrap(), vec![3, 5, 7, 9]);
        assert_eq!(parse_lambdas("even:3..9").unwrap(), vec![4, 6, 8]);
        assert_eq!(parse_lambdas("dyadic:2").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(
            parse_lambdas("odd:dyadic:2..3").unwrap(),
            vec![5, 7, 9, 11, 13, 15]
        );
        assert_eq!(parse_lambdas("odd:49..401").unwrap().len(), 177);
        assert!(parse_lambdas("0").is_err());
        assert!(parse_lambdas("9..3").is_err());
        assert!(parse_lambdas("x").is_err());
        assert!(parse_lambdas("even:1..1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_ints("1,-2, 3").unwrap(), vec![1, -2, 3]);
        assert_eq!(parse_reals("0.5,1e-3").unwrap(), vec![0.5, 1e-3]);
        assert!(parse_ints("1,a").is_err());
    }
}
