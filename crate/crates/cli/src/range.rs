//! MATLAB-style colon ranges: `start:step:stop`, `start:stop` (step 1) or a
//! single value, optionally several of them separated by commas. The stop
//! value is included when the progression reaches it.

use anyhow::{bail, Context, Result};

/// Parses a comma-separated list of `f64` ranges.
pub fn parse_f64(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        let nums = part
            .split(':')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in range {spec:?}")))
            .collect::<Result<Vec<_>>>()?;
        let (start, step, stop) = match nums[..] {
            [a] => (a, 1.0, a),
            [a, b] => (a, 1.0, b),
            [a, s, b] => (a, s, b),
            _ => bail!("range {part:?} has more than three fields"),
        };
        if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
            bail!("range {part:?} is not finite");
        }
        if step == 0.0 {
            bail!("range {part:?} has zero step");
        }
        let slack = 1e-9 * step.abs();
        let mut i = 0u32;
        loop {
            // start + i*step, rounded to 12 significant digits so 0.05:0.05:0.95
            // yields 0.15 rather than 0.15000000000000002.
            let v: f64 = format!("{:.11e}", start + f64::from(i) * step).parse()?;
            if (step > 0.0 && v > stop + slack) || (step < 0.0 && v < stop - slack) {
                break;
            }
            out.push(v);
            i += 1;
            if i > 1_000_000 {
                bail!("range {part:?} is too long");
            }
        }
    }
    if out.is_empty() {
        bail!("range {spec:?} is empty");
    }
    Ok(out)
}

/// Parses a comma-separated list of integer ranges.
pub fn parse_usize(spec: &str) -> Result<Vec<usize>> {
    parse_f64(spec)?
        .into_iter()
        .map(|v| {
            if v < 0.0 || v.fract() != 0.0 {
                bail!("range {spec:?} contains non-integer value {v}");
            }
            Ok(v as usize)
        })
        .collect()
}
