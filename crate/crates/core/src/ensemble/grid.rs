use crate::error::{Error, Result};

/// Parses a control-parameter grid.
///
/// Accepted forms are `lin:a:b:k` (k evenly spaced values from a to b),
/// `log:a:b:k` (k log-spaced values, a and b positive) and a comma-separated
/// list of values. Endpoints are reproduced exactly.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let bad = |why: String| Error::Parameter(format!("invalid grid '{text}': {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 1 {
        return text
            .split(',')
            .map(|v| {
                let x: f64 = v.trim().parse().map_err(|_| bad(format!("'{}' is not a number", v.trim())))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(bad(format!("{x} is not finite")))
                }
            })
            .collect();
    }
    let [kind, a, b, k] = parts[..] else {
        return Err(bad("expected lin:a:b:k or log:a:b:k".into()));
    };
    let number = |s: &str| -> Result<f64> {
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(bad(format!("'{s}' is not a finite number"))),
        }
    };
    let (a, b) = (number(a)?, number(b)?);
    let k: usize = k.parse().map_err(|_| bad(format!("'{k}' is not a point count")))?;
    if k == 0 {
        return Err(bad("point count must be at least 1".into()));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let last = (k - 1) as f64;
    let mut values: Vec<f64> = match kind {
        "lin" => (0..k).map(|i| a + (b - a) * i as f64 / last).collect(),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(bad("log grids need positive endpoints".into()));
            }
            let (la, lb) = (a.ln(), b.ln());
            (0..k).map(|i| (la + (lb - la) * i as f64 / last).exp()).collect()
        }
        other => return Err(bad(format!("unknown spacing '{other}' (expected lin or log)"))),
    };
    values[0] = a;
    values[k - 1] = b;
    Ok(values)
}
