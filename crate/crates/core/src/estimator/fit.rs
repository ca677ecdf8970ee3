use crate::error::{Error, Result};

/// `mu(beta) = c + a exp(-b beta)` with the linear variance model
/// `sigma^2 = k mu + l` fitted alongside when variances are available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Root-mean-square error of the mean fit.
    pub residual: f64,
    pub kl: Option<(f64, f64)>,
}

impl DecayFit {
    pub fn mu(&self, beta: f64) -> f64 {
        self.c + self.a * (-self.b * beta).exp()
    }

    /// `sqrt(a b) exp(-b beta / 2)`; its square is `-d mu / d beta`.
    pub fn sigma(&self, beta: f64) -> f64 {
        (self.a * self.b).sqrt() * (-self.b * beta / 2.0).exp()
    }
}

/// Best `(a, c, sse)` for fixed `b`, with `a, c >= 0`.
fn solve_linear(points: &[(f64, f64)], b: f64) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let e: Vec<f64> = points.iter().map(|p| (-b * p.0).exp()).collect();
    let se: f64 = e.iter().sum();
    let see: f64 = e.iter().map(|v| v * v).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sey: f64 = e.iter().zip(points).map(|(v, p)| v * p.1).sum();
    let det = n * see - se * se;
    let (mut a, mut c) = if det.abs() > 1e-300 {
        ((n * sey - se * sy) / det, (see * sy - se * sey) / det)
    } else {
        (0.0, sy / n)
    };
    if c < 0.0 {
        c = 0.0;
        a = if see > 0.0 { sey / see } else { 0.0 };
    }
    if a < 0.0 {
        a = 0.0;
        c = (sy / n).max(0.0);
    }
    let sse = points
        .iter()
        .zip(&e)
        .map(|(p, v)| {
            let r = p.1 - c - a * v;
            r * r
        })
        .sum();
    (a, c, sse)
}

/// Least-squares fit of the decay model to `(beta, mu)` points: logarithmic
/// grid over `b`, golden-section refinement, `(a, c)` solved linearly per `b`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    let mut pts = points.to_vec();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut distinct = pts.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitRejected(format!(
            "{} distinct beta values; at least 3 are needed",
            distinct.len()
        )));
    }
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.0 < 0.0) {
        return Err(Error::FitRejected("non-finite or negative input".into()));
    }
    if pts.last().unwrap().1 >= pts[0].1 {
        return Err(Error::FitRejected("mean does not decrease with beta".into()));
    }
    let bmax = pts.last().unwrap().0;
    let span = bmax - pts[0].0;
    let lo = (1e-4 / bmax).ln();
    let hi = (1e4 / span).ln();
    let steps = 400;
    let sse_at = |lb: f64| solve_linear(&pts, lb.exp()).2;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&g| sse_at(g)).collect();
    let k = (0..vals.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let (mut x0, mut x3) = (grid[k.saturating_sub(1)], grid[(k + 1).min(steps)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = x3 - phi * (x3 - x0);
    let mut x2 = x0 + phi * (x3 - x0);
    let (mut f1, mut f2) = (sse_at(x1), sse_at(x2));
    for _ in 0..200 {
        if (x3 - x0).abs() < 1e-14 {
            break;
        }
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - phi * (x3 - x0);
            f1 = sse_at(x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + phi * (x3 - x0);
            f2 = sse_at(x2);
        }
    }
    let mut best_lb = if f1 < f2 { x1 } else { x2 };
    if vals[k] < sse_at(best_lb) {
        best_lb = grid[k];
    }
    let b = best_lb.exp();
    let (a, c, sse) = solve_linear(&pts, b);
    Ok(DecayFit {
        a,
        b,
        c,
        residual: (sse / pts.len() as f64).sqrt(),
        kl: None,
    })
}

/// Ordinary least squares of `y = slope x + intercept`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::FitRejected("a line needs two points".into()));
    }
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::FitRejected("all abscissae coincide".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    Ok((slope, (sy - slope * sx) / n))
}

/// Degree-2 polynomial fit of acceptance against beta, clamped to `[f_min, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceModel {
    pub coef: [f64; 3],
    pub f_min: f64,
}

impl AcceptanceModel {
    pub fn fit(points: &[(f64, f64)], f_min: f64) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::FitRejected("acceptance fit needs three points".into()));
        }
        // normal equations of [1, x, x^2] on a scaled abscissa
        let s = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1e-300);
        let mut m = [[0.0f64; 4]; 3];
        for &(x, y) in points {
            let x = x / s;
            let row = [1.0, x, x * x];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += row[i] * row[j];
                }
                m[i][3] += row[i] * y;
            }
        }
        let sol = solve3(m).ok_or_else(|| Error::FitRejected("acceptance fit is singular".into()))?;
        Ok(AcceptanceModel {
            coef: [sol[0], sol[1] / s, sol[2] / (s * s)],
            f_min,
        })
    }

    pub fn raw(&self, beta: f64) -> f64 {
        self.coef[0] + self.coef[1] * beta + self.coef[2] * beta * beta
    }

    /// Clamped value; an error where the polynomial is not positive.
    pub fn eval(&self, beta: f64) -> Result<f64> {
        let r = self.raw(beta);
        if r <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "fitted acceptance {r:.3e} at beta = {beta} is not positive"
            )));
        }
        Ok(r.clamp(self.f_min, 1.0))
    }
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}
