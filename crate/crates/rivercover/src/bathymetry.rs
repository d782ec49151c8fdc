//! Gaussian-process depth surfaces from sonar point samples.
//!
//! Exact GP regression with a squared-exponential kernel: Cholesky solve for
//! the posterior, closed-form marginal likelihood and its gradient, and a
//! restarted gradient ascent for hyperparameter selection. Inputs are
//! canonically sorted before fitting so results do not depend on sample
//! order.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::river_map::{Cell, RiverMap};
use crate::{Error, Result};

/// One sonar depth measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    pub position: Point,
    pub depth: f64,
}

/// Squared-exponential hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyperParams {
    /// Kernel length scale in meters.
    pub length_scale: f64,
    /// Signal variance (prior variance of the latent depth).
    pub signal_var: f64,
    /// Observation noise variance.
    pub noise_var: f64,
}

impl GpHyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.length_scale <= 0.0 || self.signal_var <= 0.0 || self.noise_var < 0.0 {
            return Err(Error::validation(format!(
                "invalid hyperparameters: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Covariance function interface; the squared exponential is the default
/// and the only built-in.
pub trait CovarianceKernel {
    fn eval(&self, a: Point, b: Point, hp: &GpHyperParams) -> f64;
    /// Partial derivatives of `eval` with respect to
    /// (length_scale, signal_var).
    fn grad(&self, a: Point, b: Point, hp: &GpHyperParams) -> [f64; 2];
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredExponential;

impl CovarianceKernel for SquaredExponential {
    fn eval(&self, a: Point, b: Point, hp: &GpHyperParams) -> f64 {
        let r2 = (a - b).dot(a - b);
        hp.signal_var * (-r2 / (2.0 * hp.length_scale * hp.length_scale)).exp()
    }

    fn grad(&self, a: Point, b: Point, hp: &GpHyperParams) -> [f64; 2] {
        let r2 = (a - b).dot(a - b);
        let l = hp.length_scale;
        let e = (-r2 / (2.0 * l * l)).exp();
        [hp.signal_var * e * r2 / (l * l * l), e]
    }
}

const JITTER: f64 = 1e-8;

/// A fitted exact GP over depth samples.
pub struct DepthGp {
    samples: Vec<DepthSample>,
    hp: GpHyperParams,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    /// Training mean; the GP is fit on residuals around it.
    y_mean: f64,
}

/// Total order on samples so fitting is permutation invariant.
fn canonical_sort(samples: &mut [DepthSample]) {
    samples.sort_by(|a, b| {
        (a.position.x, a.position.y, a.depth)
            .partial_cmp(&(b.position.x, b.position.y, b.depth))
            .unwrap()
    });
}

impl DepthGp {
    pub fn fit(samples: &[DepthSample], hp: GpHyperParams) -> Result<DepthGp> {
        hp.validate()?;
        if samples.len() < 3 {
            return Err(Error::validation("need at least 3 depth samples"));
        }
        let mut samples = samples.to_vec();
        canonical_sort(&mut samples);
        let n = samples.len();
        let kernel = SquaredExponential;
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = kernel.eval(samples[i].position, samples[j].position, &hp);
            }
            k[(i, i)] += hp.noise_var + JITTER;
        }
        let chol = Cholesky::new(k).ok_or_else(|| {
            Error::validation(
                "kernel matrix is singular even with jitter; check for duplicate samples",
            )
        })?;
        let y_mean = samples.iter().map(|s| s.depth).sum::<f64>() / n as f64;
        let y = DVector::from_iterator(n, samples.iter().map(|s| s.depth - y_mean));
        let alpha = chol.solve(&y);
        Ok(DepthGp {
            samples,
            hp,
            chol,
            alpha,
            y_mean,
        })
    }

    pub fn hyperparams(&self) -> GpHyperParams {
        self.hp
    }

    pub fn training_len(&self) -> usize {
        self.samples.len()
    }

    /// Posterior mean and latent variance at a point.
    pub fn predict(&self, p: Point) -> (f64, f64) {
        let kernel = SquaredExponential;
        let n = self.samples.len();
        let kstar = DVector::from_iterator(
            n,
            self.samples
                .iter()
                .map(|s| kernel.eval(s.position, p, &self.hp)),
        );
        let mean = self.y_mean + kstar.dot(&self.alpha);
        let v = self.chol.solve(&kstar);
        let var = (self.hp.signal_var - kstar.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Log marginal likelihood of the training data.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.samples.len() as f64;
        let y = DVector::from_iterator(
            self.samples.len(),
            self.samples.iter().map(|s| s.depth - self.y_mean),
        );
        let data_fit = -0.5 * y.dot(&self.alpha);
        let log_det: f64 = (0..self.samples.len())
            .map(|i| self.chol.l_dirty()[(i, i)].ln())
            .sum();
        data_fit - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// Gradient of the log marginal likelihood with respect to
    /// (length_scale, signal_var, noise_var).
    pub fn lml_gradient(&self) -> [f64; 3] {
        let kernel = SquaredExponential;
        let n = self.samples.len();
        // 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
        let kinv = self.chol.inverse();
        let mut grad = [0.0f64; 3];
        for i in 0..n {
            for j in 0..n {
                let w = self.alpha[i] * self.alpha[j] - kinv[(i, j)];
                let [dl, ds] = kernel.grad(
                    self.samples[i].position,
                    self.samples[j].position,
                    &self.hp,
                );
                grad[0] += 0.5 * w * dl;
                grad[1] += 0.5 * w * ds;
                if i == j {
                    grad[2] += 0.5 * w;
                }
            }
        }
        grad
    }
}

/// Hyperparameter selection: gradient ascent on the log marginal likelihood
/// in log-parameter space, with random restarts.
pub fn fit_auto(samples: &[DepthSample], restarts: usize, seed: u64) -> Result<DepthGp> {
    if samples.len() < 3 {
        return Err(Error::validation("need at least 3 depth samples"));
    }
    let (min_x, max_x) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.position.x), hi.max(s.position.x))
        });
    let (min_y, max_y) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.position.y), hi.max(s.position.y))
        });
    let extent = ((max_x - min_x).hypot(max_y - min_y)).max(1.0);
    let mean_depth = samples.iter().map(|s| s.depth).sum::<f64>() / samples.len() as f64;
    let var_depth = (samples
        .iter()
        .map(|s| (s.depth - mean_depth).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
        .max(1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, DepthGp)> = None;
    for _ in 0..restarts.max(1) {
        let mut log_hp = [
            (extent * rng.gen_range(0.05..0.5)).ln(),
            (var_depth * rng.gen_range(0.5..2.0)).ln(),
            (var_depth * rng.gen_range(1e-4..5e-2)).ln(),
        ];
        let mut step = 0.1;
        let mut current = match DepthGp::fit(samples, hp_from_log(log_hp)) {
            Ok(gp) => gp,
            Err(_) => continue,
        };
        let mut lml = current.log_marginal_likelihood();
        for _ in 0..120 {
            let g_raw = current.lml_gradient();
            let hp = current.hyperparams();
            // chain rule to log space
            let g = [
                g_raw[0] * hp.length_scale,
                g_raw[1] * hp.signal_var,
                g_raw[2] * hp.noise_var,
            ];
            let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if norm < 1e-8 {
                break;
            }
            let proposal = [
                log_hp[0] + step * g[0] / norm,
                log_hp[1] + step * g[1] / norm,
                log_hp[2] + step * g[2] / norm,
            ];
            match DepthGp::fit(samples, hp_from_log(proposal)) {
                Ok(gp) => {
                    let l = gp.log_marginal_likelihood();
                    if l > lml {
                        lml = l;
                        current = gp;
                        log_hp = proposal;
                        step = (step * 1.2).min(0.5);
                    } else {
                        step *= 0.5;
                        if step < 1e-4 {
                            break;
                        }
                    }
                }
                Err(_) => {
                    step *= 0.5;
                    if step < 1e-4 {
                        break;
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|(b, _)| lml > *b) {
            best = Some((lml, current));
        }
    }
    best.map(|(_, gp)| gp)
        .ok_or_else(|| Error::validation("hyperparameter search found no valid fit"))
}

fn hp_from_log(log_hp: [f64; 3]) -> GpHyperParams {
    GpHyperParams {
        length_scale: log_hp[0].exp(),
        signal_var: log_hp[1].exp(),
        noise_var: log_hp[2].exp(),
    }
}

/// Gridded posterior over the free cells of a river map.
#[derive(Debug, Clone)]
pub struct DepthMap {
    width: usize,
    height: usize,
    resolution: f64,
    mean: Vec<f64>,
    std: Vec<f64>,
    pub hp: GpHyperParams,
}

/// Fitting options for [`fit_depth_gp`].
#[derive(Debug, Clone, Copy)]
pub enum FitOptions {
    Params(GpHyperParams),
    Auto { restarts: usize, seed: u64 },
}

/// Exact fits cap out at this many samples; larger inputs are grid-thinned.
pub const EXACT_FIT_LIMIT: usize = 5000;

/// Keeps at most one sample per thinning cell (the first in canonical
/// order), used when an input exceeds the exact-fit limit.
pub fn thin_samples(samples: &[DepthSample], cell: f64) -> Vec<DepthSample> {
    let mut sorted = samples.to_vec();
    canonical_sort(&mut sorted);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for s in sorted {
        let key = (
            (s.position.x / cell).floor() as i64,
            (s.position.y / cell).floor() as i64,
        );
        if seen.insert(key) {
            out.push(s);
        }
    }
    out
}

/// Fits a GP to the samples and evaluates mean and standard deviation over
/// every free cell of the map.
pub fn fit_depth_gp(
    map: &RiverMap,
    samples: &[DepthSample],
    options: FitOptions,
) -> Result<(DepthMap, DepthGp)> {
    let mut data = samples.to_vec();
    if data.len() > EXACT_FIT_LIMIT {
        // declared thinning cell: double the map resolution, grown until the
        // sample count fits
        let mut cell = 2.0 * map.resolution();
        while data.len() > EXACT_FIT_LIMIT {
            data = thin_samples(&data, cell);
            cell *= 1.5;
        }
    }
    if !non_collinear(&data) {
        return Err(Error::validation(
            "need at least 3 non-collinear depth samples",
        ));
    }
    let gp = match options {
        FitOptions::Params(hp) => DepthGp::fit(&data, hp)?,
        FitOptions::Auto { restarts, seed } => fit_auto(&data, restarts, seed)?,
    };
    let (w, h) = (map.grid_width(), map.grid_height());
    let mut mean = vec![f64::NAN; w * h];
    let mut std = vec![f64::NAN; w * h];
    for iy in 0..h {
        for ix in 0..w {
            if map.cell(ix, iy) != Cell::Free {
                continue;
            }
            let idx = iy * w + ix;
            let (m, v) = gp.predict(map.cell_center(ix, iy));
            mean[idx] = m;
            std[idx] = v.sqrt();
        }
    }
    Ok((
        DepthMap {
            width: w,
            height: h,
            resolution: map.resolution(),
            mean,
            std,
            hp: gp.hyperparams(),
        },
        gp,
    ))
}

fn non_collinear(samples: &[DepthSample]) -> bool {
    if samples.len() < 3 {
        return false;
    }
    let a = samples[0].position;
    samples.iter().skip(1).any(|s| {
        samples
            .iter()
            .skip(1)
            .any(|t| ((s.position - a).cross(t.position - a)).abs() > 1e-6)
    })
}

impl DepthMap {
    pub fn mean_at(&self, p: Point) -> Option<f64> {
        let ix = (p.x / self.resolution).floor() as i64;
        let iy = (p.y / self.resolution).floor() as i64;
        if ix < 0 || iy < 0 || ix >= self.width as i64 || iy >= self.height as i64 {
            return None;
        }
        let v = self.mean[iy as usize * self.width + ix as usize];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    pub fn std_at(&self, p: Point) -> Option<f64> {
        let ix = (p.x / self.resolution).floor() as i64;
        let iy = (p.y / self.resolution).floor() as i64;
        if ix < 0 || iy < 0 || ix >= self.width as i64 || iy >= self.height as i64 {
            return None;
        }
        let v = self.std[iy as usize * self.width + ix as usize];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    /// ESRI ASCII raster of the posterior mean (or std), NODATA over land.
    pub fn to_esri_ascii(&self, layer: DepthLayer) -> String {
        let data = match layer {
            DepthLayer::Mean => &self.mean,
            DepthLayer::Std => &self.std,
        };
        let mut out = String::new();
        out.push_str(&format!("ncols {}\n", self.width));
        out.push_str(&format!("nrows {}\n", self.height));
        out.push_str("xllcorner 0.000\n");
        out.push_str("yllcorner 0.000\n");
        out.push_str(&format!("cellsize {:.3}\n", self.resolution));
        out.push_str("NODATA_value -9999\n");
        for iy in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width)
                .map(|ix| {
                    let v = data[iy * self.width + ix];
                    if v.is_nan() {
                        "-9999".to_string()
                    } else {
                        format!("{v:.3}")
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DepthLayer {
    Mean,
    Std,
}

/// Root-mean-square error of the gridded posterior against held-out samples.
pub fn rmse(map: &DepthMap, held_out: &[DepthSample]) -> Result<f64> {
    if held_out.is_empty() {
        return Err(Error::validation("held-out set is empty"));
    }
    let mut acc = 0.0;
    let mut n = 0usize;
    for s in held_out {
        if let Some(m) = map.mean_at(s.position) {
            acc += (m - s.depth).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::validation("no held-out sample lies on the map"));
    }
    Ok((acc / n as f64).sqrt())
}

/// K-fold cross-validated RMSE: each fold is held out once, predictions are
/// pooled. The split is a seeded shuffle of the canonical order.
pub fn cross_validated_rmse(
    map: &RiverMap,
    samples: &[DepthSample],
    options: FitOptions,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    if folds < 2 || samples.len() < folds * 3 {
        return Err(Error::validation("need at least 3 samples per fold"));
    }
    let mut data = samples.to_vec();
    canonical_sort(&mut data);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut acc = 0.0;
    let mut n = 0usize;
    for fold in 0..folds {
        let held: Vec<DepthSample> = order
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds == fold)
            .map(|(_, &idx)| data[idx])
            .collect();
        let train: Vec<DepthSample> = order
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds != fold)
            .map(|(_, &idx)| data[idx])
            .collect();
        let (dm, _) = fit_depth_gp(map, &train, options)?;
        for s in &held {
            if let Some(m) = dm.mean_at(s.position) {
                acc += (m - s.depth).powi(2);
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::validation("cross-validation produced no predictions"));
    }
    Ok((acc / n as f64).sqrt())
}

/// Parses `x,y,depth` CSV (header line optional).
pub fn samples_from_csv(text: &str) -> Result<Vec<DepthSample>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::validation(format!(
                "depth CSV line {} needs x,y,depth",
                lineno + 1
            )));
        }
        let parse = |s: &str| s.parse::<f64>().ok();
        match (parse(fields[0]), parse(fields[1]), parse(fields[2])) {
            (Some(x), Some(y), Some(d)) => out.push(DepthSample {
                position: Point::new(x, y),
                depth: d,
            }),
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(Error::validation(format!(
                    "depth CSV line {}: bad number",
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::validation("depth CSV contains no samples"));
    }
    Ok(out)
}

/// Parses GPX track points carrying a depth extension:
/// `<trkpt lat=".." lon=".."><extensions><depth>D</depth>...`.
/// Positions convert to map meters through the georeference.
pub fn samples_from_gpx(text: &str, geo: &crate::river_map::GeoRef) -> Result<Vec<DepthSample>> {
    let mut out = Vec::new();
    for chunk in text.split("<trkpt").skip(1) {
        let attr = |name: &str| -> Option<f64> {
            let key = format!("{name}=\"");
            let start = chunk.find(&key)? + key.len();
            let end = chunk[start..].find('"')?;
            chunk[start..start + end].parse().ok()
        };
        let depth = chunk
            .split_once("<depth>")
            .and_then(|(_, rest)| rest.split_once("</depth>"))
            .and_then(|(v, _)| v.trim().parse::<f64>().ok());
        match (attr("lat"), attr("lon"), depth) {
            (Some(lat), Some(lon), Some(depth)) => out.push(DepthSample {
                position: geo.from_lat_lon(lat, lon),
                depth,
            }),
            (Some(_), Some(_), None) => continue, // track point without sonar
            _ => return Err(Error::validation("GPX track point missing lat/lon")),
        }
    }
    if out.is_empty() {
        return Err(Error::validation("GPX contains no depth-tagged track points"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_samples(n: usize) -> Vec<DepthSample> {
        // depth(x, y) = 5 + 0.001 x over a 400 x 100 m patch
        let mut out = Vec::new();
        let side = (n as f64).sqrt().ceil() as usize;
        for i in 0..side {
            for j in 0..side {
                if out.len() >= n {
                    break;
                }
                let x = 400.0 * i as f64 / (side - 1).max(1) as f64;
                let y = 100.0 * j as f64 / (side - 1).max(1) as f64;
                out.push(DepthSample {
                    position: Point::new(x, y),
                    depth: 5.0 + 0.001 * x,
                });
            }
        }
        out
    }

    fn default_hp() -> GpHyperParams {
        GpHyperParams {
            length_scale: 80.0,
            signal_var: 1.0,
            noise_var: 1e-4,
        }
    }

    #[test]
    fn interpolates_single_training_point() {
        let samples = vec![
            DepthSample { position: Point::new(10.0, 10.0), depth: 4.0 },
            DepthSample { position: Point::new(100.0, 20.0), depth: 6.0 },
            DepthSample { position: Point::new(50.0, 80.0), depth: 5.0 },
        ];
        let gp = DepthGp::fit(&samples, default_hp()).unwrap();
        let (m, _) = gp.predict(Point::new(10.0, 10.0));
        let noise_std = default_hp().noise_var.sqrt();
        assert!((m - 4.0).abs() <= 2.0 * noise_std + 0.01, "mean {m}");
    }

    #[test]
    fn plane_recovered_with_low_error() {
        let train = plane_samples(100);
        let gp = DepthGp::fit(&train, default_hp()).unwrap();
        let mut acc = 0.0;
        let mut n = 0;
        for i in 0..20 {
            let p = Point::new(17.0 + 18.0 * i as f64, 41.0);
            let truth = 5.0 + 0.001 * p.x;
            let (m, _) = gp.predict(p);
            acc += (m - truth).powi(2);
            n += 1;
        }
        let rmse = (acc / n as f64).sqrt();
        assert!(rmse < 0.05, "held-out rmse {rmse}");
    }

    #[test]
    fn constant_depth_posterior_and_shrinking_std() {
        let hp = default_hp();
        let make = |n: usize| -> Vec<DepthSample> {
            (0..n)
                .map(|i| DepthSample {
                    position: Point::new(
                        50.0 * (i % 5) as f64 + 7.0 * (i / 5) as f64,
                        30.0 * (i / 5) as f64 + 3.0 * (i % 3) as f64,
                    ),
                    depth: 7.5,
                })
                .collect()
        };
        let probe = Point::new(60.0, 35.0);
        let gp5 = DepthGp::fit(&make(5), hp).unwrap();
        let gp25 = DepthGp::fit(&make(25), hp).unwrap();
        let (m5, v5) = gp5.predict(probe);
        let (m25, v25) = gp25.predict(probe);
        assert!((m5 - 7.5).abs() < 0.2, "mean {m5}");
        assert!((m25 - 7.5).abs() < 0.05, "mean {m25}");
        assert!(v25 < v5, "std must shrink with more samples: {v25} vs {v5}");
    }

    #[test]
    fn posterior_variance_below_prior_at_training_points() {
        let train = plane_samples(40);
        let gp = DepthGp::fit(&train, default_hp()).unwrap();
        for s in train.iter().step_by(7) {
            let (_, v) = gp.predict(s.position);
            assert!(v <= default_hp().signal_var + 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // random small instances, all three hyperparameters
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let n = rng.gen_range(6..=20);
            let samples: Vec<DepthSample> = (0..n)
                .map(|_| DepthSample {
                    position: Point::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..80.0)),
                    depth: 5.0 + rng.gen_range(-1.0..1.0),
                })
                .collect();
            let hp = GpHyperParams {
                length_scale: rng.gen_range(20.0..100.0),
                signal_var: rng.gen_range(0.5..2.0),
                noise_var: rng.gen_range(0.01..0.1),
            };
            let gp = DepthGp::fit(&samples, hp).unwrap();
            let grad = gp.lml_gradient();
            let lml_at = |hp: GpHyperParams| DepthGp::fit(&samples, hp).unwrap().log_marginal_likelihood();
            let checks = [
                (0, GpHyperParams { length_scale: hp.length_scale * (1.0 + 1e-6), ..hp },
                     GpHyperParams { length_scale: hp.length_scale * (1.0 - 1e-6), ..hp },
                     hp.length_scale * 1e-6),
                (1, GpHyperParams { signal_var: hp.signal_var * (1.0 + 1e-6), ..hp },
                     GpHyperParams { signal_var: hp.signal_var * (1.0 - 1e-6), ..hp },
                     hp.signal_var * 1e-6),
                (2, GpHyperParams { noise_var: hp.noise_var * (1.0 + 1e-6), ..hp },
                     GpHyperParams { noise_var: hp.noise_var * (1.0 - 1e-6), ..hp },
                     hp.noise_var * 1e-6),
            ];
            for (idx, up, down, h) in checks {
                let fd = (lml_at(up) - lml_at(down)) / (2.0 * h);
                let denom = fd.abs().max(grad[idx].abs()).max(1e-8);
                let rel = (fd - grad[idx]).abs() / denom;
                assert!(
                    rel < 1e-5,
                    "trial {trial} grad[{idx}]: analytic {} vs fd {fd} (rel {rel})",
                    grad[idx]
                );
            }
        }
    }

    #[test]
    fn permutation_invariance_is_bitwise() {
        let train = plane_samples(30);
        let mut shuffled = train.clone();
        shuffled.reverse();
        shuffled.swap(3, 17);
        let a = DepthGp::fit(&train, default_hp()).unwrap();
        let b = DepthGp::fit(&shuffled, default_hp()).unwrap();
        for i in 0..10 {
            let p = Point::new(13.0 + 37.0 * i as f64, 29.0);
            let (ma, va) = a.predict(p);
            let (mb, vb) = b.predict(p);
            assert_eq!(ma.to_bits(), mb.to_bits());
            assert_eq!(va.to_bits(), vb.to_bits());
        }
    }

    #[test]
    fn duplicate_points_survive_via_jitter() {
        let mut samples = plane_samples(10);
        samples.push(samples[0]);
        assert!(DepthGp::fit(&samples, default_hp()).is_ok());
    }

    #[test]
    fn rmse_closed_forms() {
        let r = crate::synth::rectangle_river(300.0, 60.0, 3.0).unwrap();
        let train: Vec<DepthSample> = (0..40)
            .map(|i| DepthSample {
                position: Point::new(12.0 + 7.0 * i as f64, 15.0 + (i % 5) as f64 * 8.0),
                depth: 5.0,
            })
            .collect();
        let (dm, _) = fit_depth_gp(&r.map, &train, FitOptions::Params(default_hp())).unwrap();
        // predictions equal samples -> rmse ~ 0
        let r0 = rmse(&dm, &train).unwrap();
        assert!(r0 < 0.02, "rmse {r0}");
        // constant offset delta -> exactly delta (up to the near-zero base)
        let offset: Vec<DepthSample> = train
            .iter()
            .map(|s| DepthSample {
                position: s.position,
                depth: s.depth + 0.75,
            })
            .collect();
        let r1 = rmse(&dm, &offset).unwrap();
        assert!((r1 - 0.75).abs() < 0.02, "rmse {r1}");
        assert!(rmse(&dm, &[]).is_err());
    }

    #[test]
    fn gpx_depth_parsing() {
        let geo = crate::river_map::GeoRef::new(33.8, -80.8);
        let (lat, lon) = geo.to_lat_lon(Point::new(120.0, 45.0));
        let gpx = format!(
            "<gpx><trk><trkseg>\
             <trkpt lat=\"{lat:.7}\" lon=\"{lon:.7}\"><extensions><depth>6.25</depth></extensions></trkpt>\
             <trkpt lat=\"{lat:.7}\" lon=\"{lon:.7}\"></trkpt>\
             </trkseg></trk></gpx>"
        );
        let samples = samples_from_gpx(&gpx, &geo).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].depth, 6.25);
        assert!(samples[0].position.distance(Point::new(120.0, 45.0)) < 0.02);
        assert!(samples_from_gpx("<gpx></gpx>", &geo).is_err());
    }

    #[test]
    fn csv_parsing() {
        let text = "x,y,depth\n1.0,2.0,3.5\n4, 5, 6.25\n";
        let samples = samples_from_csv(text).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[1].depth, 6.25);
        assert!(samples_from_csv("x,y\n1,2\n").is_err());
        assert!(samples_from_csv("").is_err());
    }

    #[test]
    fn thinning_reduces_counts() {
        let dense = plane_samples(400);
        let thin = thin_samples(&dense, 50.0);
        assert!(thin.len() < dense.len());
        assert!(thin.len() >= 9);
    }
}
