//! Parameter-grid parsing: q lists and log/linear q grids, plus integer
//! ranges for lengths and separations.

/// Accepts `--q 1` or `--q 0.5,1,2` and `--q-grid start:stop:count[:log|lin]`.
/// With neither flag, falls back to the given default grid.
pub fn q_values(
    q: &Option<String>,
    q_grid: &Option<String>,
    default_grid: &str,
) -> Result<Vec<f64>, String> {
    if let Some(list) = q {
        let mut out = Vec::new();
        for part in list.split(',') {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| format!("invalid q value '{part}'"))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("q must be positive and finite, got '{part}'"));
            }
            out.push(v);
        }
        if out.is_empty() {
            return Err("empty q list".into());
        }
        return Ok(out);
    }
    let spec = q_grid.as_deref().unwrap_or(default_grid);
    parse_grid(spec)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!("grid '{spec}' is not start:stop:count[:log|lin]"));
    }
    let start: f64 = parts[0].parse().map_err(|_| format!("bad grid start '{}'", parts[0]))?;
    let stop: f64 = parts[1].parse().map_err(|_| format!("bad grid stop '{}'", parts[1]))?;
    let count: usize = parts[2].parse().map_err(|_| format!("bad grid count '{}'", parts[2]))?;
    let log = match parts.get(3).copied().unwrap_or("log") {
        "log" => true,
        "lin" => false,
        other => return Err(format!("grid spacing must be log or lin, got '{other}'")),
    };
    if !(start.is_finite() && start > 0.0 && stop.is_finite() && stop > 0.0) {
        return Err(format!("grid endpoints must be positive, got '{spec}'"));
    }
    if count == 0 {
        return Err("grid count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        // endpoints exact, interior points interpolated
        let v = if i == 0 {
            start
        } else if i == count - 1 {
            stop
        } else {
            let t = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + t * (stop.ln() - start.ln())).exp()
            } else {
                start + t * (stop - start)
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Accepts `12`, `4,6` or `2..6` (inclusive).
pub fn int_values(spec: &str, what: &str) -> Result<Vec<i64>, String> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: i64 = a.parse().map_err(|_| format!("bad {what} range '{spec}'"))?;
        let hi: i64 = b.parse().map_err(|_| format!("bad {what} range '{spec}'"))?;
        if lo > hi {
            return Err(format!("{what} range '{spec}' is empty"));
        }
        return Ok((lo..=hi).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        out.push(part.trim().parse().map_err(|_| format!("bad {what} value '{part}'"))?);
    }
    if out.is_empty() {
        return Err(format!("empty {what} list"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints_exactly() {
        let g = parse_grid("0.25:4:13:log").unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[12], 4.0);
        // log spacing is symmetric around 1 for this span
        assert!((g[6] - 1.0).abs() < 1e-12);
        let lin = parse_grid("1:3:3:lin").unwrap();
        assert_eq!(lin, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_malformed_grids() {
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:2:5:log").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("1:2:5:geometric").is_err());
        assert!(q_values(&Some("1,-2".into()), &None, "0.25:4:13:log").is_err());
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(int_values("2..6", "L").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(int_values("12", "L").unwrap(), vec![12]);
        assert_eq!(int_values("4,6", "L").unwrap(), vec![4, 6]);
        assert!(int_values("6..2", "L").is_err());
        assert!(int_values("x", "L").is_err());
    }
}
