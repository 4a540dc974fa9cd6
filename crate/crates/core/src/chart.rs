//! Coordinate charts (open boxes in R^n), points, and deterministic sampling.

use std::sync::Arc;

#[derive(Debug, PartialEq)]
struct ChartData {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
}

/// An open box chart with named coordinates. Cheap to clone; equality is
/// structural, so separately built but identical charts interoperate.
#[derive(Clone, Debug)]
pub struct Chart(Arc<ChartData>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum ChartError {
    #[error("chart must have at least one coordinate")]
    Empty,
    #[error("{names} names but {bounds} bounds")]
    LengthMismatch { names: usize, bounds: usize },
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("invalid bounds for `{name}`: ({lo}, {hi})")]
    BadBounds { name: String, lo: f64, hi: f64 },
    #[error("coordinate {index} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("point has {got} coordinates, chart has {want}")]
    WrongArity { got: usize, want: usize },
}

impl Chart {
    pub fn new<S: Into<String>>(
        names: Vec<S>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Chart, ChartError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ChartError::Empty);
        }
        if names.len() != bounds.len() {
            return Err(ChartError::LengthMismatch {
                names: names.len(),
                bounds: bounds.len(),
            });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(ChartError::DuplicateName(n.clone()));
            }
        }
        for (n, &(lo, hi)) in names.iter().zip(&bounds) {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(ChartError::BadBounds {
                    name: n.clone(),
                    lo,
                    hi,
                });
            }
        }
        Ok(Chart(Arc::new(ChartData { names, bounds })))
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        self.0.bounds[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    /// A name not already used by this chart: `base`, then `base2`, `base3`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        if self.index_of(base).is_none() {
            return base.to_string();
        }
        for k in 2.. {
            let candidate = format!("{base}{k}");
            if self.index_of(&candidate).is_none() {
                return candidate;
            }
        }
        unreachable!()
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .zip(&self.0.bounds)
                .all(|(&c, &(lo, hi))| c >= lo && c <= hi)
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<Point, ChartError> {
        if coords.len() != self.dim() {
            return Err(ChartError::WrongArity {
                got: coords.len(),
                want: self.dim(),
            });
        }
        for (i, (&c, &(lo, hi))) in coords.iter().zip(&self.0.bounds).enumerate() {
            if !(c >= lo && c <= hi) {
                return Err(ChartError::OutOfBounds {
                    index: i,
                    value: c,
                    lo,
                    hi,
                });
            }
        }
        Ok(Point {
            chart: self.clone(),
            coords,
        })
    }

    pub fn center(&self) -> Point {
        let coords = self.0.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
        Point {
            chart: self.clone(),
            coords,
        }
    }

    /// `count` points drawn uniformly from the box shrunk by `margin`
    /// (fraction of each side kept away from the boundary). Identical seeds
    /// give bitwise identical points.
    pub fn sample_points(&self, count: usize, seed: u64, margin: f64) -> Vec<Point> {
        let mut rng = SplitMix64::new(seed);
        let sides: Vec<(f64, f64)> = self
            .0
            .bounds
            .iter()
            .map(|&(lo, hi)| {
                let pad = margin * (hi - lo);
                (lo + pad, hi - pad)
            })
            .collect();
        (0..count)
            .map(|_| {
                let coords = sides
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.next_f64())
                    .collect();
                Point {
                    chart: self.clone(),
                    coords,
                }
            })
            .collect()
    }
}

/// A point of a chart, always inside its box.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    chart: Chart,
    coords: Vec<f64>,
}

impl Point {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }
}

/// splitmix64: the state advances by the golden-gamma increment and the
/// output is the finalizer of the advanced state (Steele, Lea, Flood 2014
/// constants).
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Central finite difference, the independent probe used to cross-check the
/// dual-number derivatives. Step h = scale * (|x| + 1); the probe shifts a
/// single coordinate and must stay inside the chart box.
pub fn fd_partial(
    f: &dyn Fn(&[f64]) -> Result<f64, crate::field::FieldError>,
    pt: &Point,
    dir: usize,
    scale: f64,
) -> Result<f64, crate::field::FieldError> {
    let x = pt.coord(dir);
    let h = scale * (x.abs() + 1.0);
    let mut plus = pt.coords().to_vec();
    let mut minus = pt.coords().to_vec();
    plus[dir] = x + h;
    minus[dir] = x - h;
    let fp = f(&plus)?;
    let fm = f(&minus)?;
    Ok((fp - fm) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart2() -> Chart {
        Chart::new(vec!["t", "x"], vec![(-1.0, 1.0), (0.5, 2.5)]).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            Chart::new(Vec::<String>::new(), vec![]),
            Err(ChartError::Empty)
        ));
        assert!(matches!(
            Chart::new(vec!["t", "t"], vec![(0.0, 1.0), (0.0, 1.0)]),
            Err(ChartError::DuplicateName(_))
        ));
        assert!(matches!(
            Chart::new(vec!["t"], vec![(1.0, 1.0)]),
            Err(ChartError::BadBounds { .. })
        ));
        assert!(matches!(
            Chart::new(vec!["t"], vec![(0.0, f64::INFINITY)]),
            Err(ChartError::BadBounds { .. })
        ));
        assert!(matches!(
            Chart::new(vec!["t"], vec![(0.0, 1.0), (0.0, 1.0)]),
            Err(ChartError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn points_are_bounds_checked() {
        let c = chart2();
        assert!(c.point(vec![0.0, 1.0]).is_ok());
        assert!(c.point(vec![0.0, 1.0, 2.0]).is_err());
        assert!(matches!(
            c.point(vec![0.0, 3.0]),
            Err(ChartError::OutOfBounds { index: 1, .. })
        ));
        // Boundary values are allowed.
        assert!(c.point(vec![-1.0, 2.5]).is_ok());
        assert_eq!(c.center().coords(), &[0.0, 1.5]);
    }

    #[test]
    fn structural_equality() {
        let a = chart2();
        let b = chart2();
        assert_eq!(a, b);
        let c = Chart::new(vec!["t", "y"], vec![(-1.0, 1.0), (0.5, 2.5)]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let c = chart2();
        assert_eq!(c.fresh_name("s"), "s");
        assert_eq!(c.fresh_name("t"), "t2");
    }

    #[test]
    fn splitmix_reference_stream() {
        // First outputs for seed 1234567, from the reference implementation.
        let mut rng = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                6457827717110365317,
                3203168211198807973,
                9817491932198370423
            ]
        );
    }

    #[test]
    fn sampling_is_deterministic_and_in_margin() {
        let c = chart2();
        let a = c.sample_points(50, 42, 0.05);
        let b = c.sample_points(50, 42, 0.05);
        assert_eq!(a.len(), 50);
        for (p, q) in a.iter().zip(&b) {
            for (x, y) in p.coords().iter().zip(q.coords()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let other = c.sample_points(50, 43, 0.05);
        assert!(a.iter().zip(&other).any(|(p, q)| p.coords() != q.coords()));
        for p in &a {
            assert!(p.coord(0) >= -0.9 && p.coord(0) <= 0.9);
            assert!(p.coord(1) >= 0.6 && p.coord(1) <= 2.4);
        }
    }

    #[test]
    fn fd_probe_matches_closed_form() {
        let c = chart2();
        let p = c.point(vec![0.25, 1.0]).unwrap();
        let f = |x: &[f64]| Ok((2.0 * x[0]).exp());
        let d = fd_partial(&f, &p, 0, 1e-6).unwrap();
        let exact = 2.0 * (0.5f64).exp();
        assert!((d - exact).abs() / exact < 1e-8);
    }
}
