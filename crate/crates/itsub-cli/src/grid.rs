use std::str::FromStr;

/// Largest number of points a grid may expand to.
pub const MAX_POINTS: usize = 10_000_000;

/// One value, `start:stop:step`, `lin:start:stop:n` or `log:start:stop:n`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Single(f64),
    Step { start: f64, stop: f64, step: f64 },
    Lin { start: f64, stop: f64, n: usize },
    Log { start: f64, stop: f64, n: usize },
}

fn num(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a point count"))
}

fn ordered(start: f64, stop: f64) -> Result<(), String> {
    if start > stop {
        return Err(format!("grid start {start} exceeds stop {stop}"));
    }
    Ok(())
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => GridSpec::Single(num(v)?),
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if !(step > 0.0) {
                    return Err(format!("grid step must be positive, got {step}"));
                }
                ordered(start, stop)?;
                if (stop - start) / step > MAX_POINTS as f64 {
                    return Err(format!("grid {s} has more than {MAX_POINTS} points"));
                }
                GridSpec::Step { start, stop, step }
            }
            [kind, start, stop, n] => {
                let (start, stop, n) = (num(start)?, num(stop)?, count(n)?);
                ordered(start, stop)?;
                if n > MAX_POINTS {
                    return Err(format!("grid {s} has more than {MAX_POINTS} points"));
                }
                match *kind {
                    "lin" => GridSpec::Lin { start, stop, n },
                    "log" if start > 0.0 => GridSpec::Log { start, stop, n },
                    "log" => return Err("log grid needs a positive start".into()),
                    _ => return Err(format!("unknown grid kind '{kind}', expected lin or log")),
                }
            }
            _ => return Err(format!("cannot parse grid '{s}'")),
        };
        Ok(grid)
    }
}

impl GridSpec {
    /// Grid points in increasing order; a range with `start = stop` is empty.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            GridSpec::Single(v) => vec![v],
            GridSpec::Step { start, stop, step } => {
                if start == stop {
                    return Vec::new();
                }
                let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
            GridSpec::Lin { start, stop, n } => spaced(start, stop, n, |a, b, f| a + (b - a) * f),
            GridSpec::Log { start, stop, n } => {
                let (a, b) = (start.log10(), stop.log10());
                spaced(a, b, n, |a, b, f| 10f64.powf(a + (b - a) * f))
            }
        }
    }
}

fn spaced(a: f64, b: f64, n: usize, at: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        _ if a == b => Vec::new(),
        1 => vec![at(a, b, 0.0)],
        _ => (0..n).map(|i| at(a, b, i as f64 / (n - 1) as f64)).collect(),
    }
}
