//! Unconstrained local minimizers used by the estimators.
//!
//! The hierarchy losses are piecewise smooth: best-response sets flip at
//! boundaries in parameter space. `minimize` runs quasi-Newton (BFGS with
//! central finite-difference gradients and a backtracking line search) and
//! then a Nelder-Mead pass from the quasi-Newton optimum, which can walk
//! across kinks the gradient model cannot see.

#[derive(Debug, Clone, Copy)]
pub struct LocalSearchConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step improves the loss by less than this.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient.
fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], g: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
        if !g[i].is_finite() {
            g[i] = 0.0;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn bfgs<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], cfg: LocalSearchConfig) -> LocalResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if n == 0 {
        return LocalResult { x, value: fx, iterations: 0, converged: true };
    }
    let mut g = vec![0.0; n];
    gradient(f, &x, &mut g);
    // inverse Hessian approximation, row-major
    let mut h = identity(n);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-10 {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            // not a descent direction: reset to steepest descent
            h = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        // keep trial steps bounded in the squashed coordinates
        let dnorm = dot(&dir, &dir).sqrt();
        let mut step = if dnorm > 5.0 { 5.0 / dnorm } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            converged = true;
            break;
        };
        let mut g_new = vec![0.0; n];
        gradient(f, &x_new, &mut g_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            update_inverse_hessian(&mut h, &s, &y, sy);
        }
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement < cfg.tol {
            converged = true;
            break;
        }
    }
    LocalResult { x, value: fx, iterations, converged }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn update_inverse_hessian(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Nelder-Mead with standard coefficients, starting from an axis-aligned simplex.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], initial_step: f64, cfg: LocalSearchConfig) -> LocalResult {
    let n = x0.len();
    if n == 0 {
        return LocalResult { x: x0.to_vec(), value: f(x0), iterations: 0, converged: true };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += initial_step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        order(&mut simplex);
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < cfg.tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    *fv = f(v);
                }
            }
        }
    }
    order(&mut simplex);
    let (x, value) = simplex.swap_remove(0);
    LocalResult { x, value, iterations, converged }
}

/// BFGS followed by a Nelder-Mead refinement; returns the better point.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], cfg: LocalSearchConfig) -> LocalResult {
    let quasi = bfgs(f, x0, cfg);
    let simplex = nelder_mead(f, &quasi.x, 0.5, cfg);
    let iterations = quasi.iterations + simplex.iterations;
    if simplex.value < quasi.value {
        LocalResult { iterations, converged: simplex.converged, ..simplex }
    } else {
        LocalResult { iterations, converged: quasi.converged, ..quasi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: LocalSearchConfig = LocalSearchConfig { max_iterations: 500, tol: 1e-12 };

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn bfgs_finds_rosenbrock_minimum() {
        let r = bfgs(&rosenbrock, &[-1.2, 1.0], CFG);
        assert!(r.value < 1e-8, "{r:?}");
    }

    #[test]
    fn nelder_mead_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + 0.5 * (x[2] - 0.25).powi(2);
        let r = nelder_mead(&f, &[0.0, 0.0, 0.0], 1.0, LocalSearchConfig { max_iterations: 2000, tol: 1e-14 });
        assert!(r.value < 1e-8, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn minimize_crosses_a_step() {
        // flat step on the way to the optimum stalls gradient search
        let f = |x: &[f64]| if x[0] < 1.0 { 5.0 } else { (x[0] - 2.0).powi(2) };
        let r = minimize(&f, &[0.8], CFG);
        assert!(r.value < 1e-6, "{r:?}");
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v.abs().sqrt()).sum::<f64>();
        let x0 = [0.3, -2.0, 1.5];
        let r = minimize(&f, &x0, CFG);
        assert!(r.value <= f(&x0));
    }
}
