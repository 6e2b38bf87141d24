use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Closed interval `[lo, hi]`; `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: f64,
    #[serde(serialize_with = "ser_upper", deserialize_with = "de_upper")]
    pub hi: f64,
}

fn ser_upper<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_none()
    } else {
        s.serialize_some(v)
    }
}

fn de_upper<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl SpectralInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        SpectralInterval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        SpectralInterval { lo: v, hi: v }
    }

    pub fn distance(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }
}

/// Normalized union of closed intervals (sorted, overlaps merged).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictedSpectrum {
    intervals: Vec<SpectralInterval>,
}

impl PredictedSpectrum {
    pub fn empty() -> Self {
        PredictedSpectrum::default()
    }

    pub fn from_intervals(mut v: Vec<SpectralInterval>) -> Self {
        v.retain(|i| i.lo <= i.hi);
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<SpectralInterval> = Vec::with_capacity(v.len());
        for i in v {
            match out.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => out.push(i),
            }
        }
        PredictedSpectrum { intervals: out }
    }

    pub fn intervals(&self) -> &[SpectralInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn union(&self, other: &PredictedSpectrum) -> PredictedSpectrum {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        PredictedSpectrum::from_intervals(v)
    }

    pub fn shift(&self, c: f64) -> PredictedSpectrum {
        PredictedSpectrum {
            intervals: self
                .intervals
                .iter()
                .map(|i| SpectralInterval::new(i.lo + c, i.hi + c))
                .collect(),
        }
    }

    pub fn distance(&self, v: f64) -> f64 {
        self.intervals
            .iter()
            .map(|i| i.distance(v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.distance(v) <= tol
    }

    /// Intersection with `[lo, hi]`; the flag reports whether anything was cut.
    pub fn clip(&self, lo: f64, hi: f64) -> (PredictedSpectrum, bool) {
        let mut clipped = false;
        let mut out = Vec::new();
        for i in &self.intervals {
            let (a, b) = (i.lo.max(lo), i.hi.min(hi));
            if a != i.lo || b != i.hi {
                clipped = true;
            }
            if a <= b {
                out.push(SpectralInterval::new(a, b));
            }
        }
        (PredictedSpectrum { intervals: out }, clipped)
    }

    /// Mesh with at most `spacing` between neighbours, endpoints included.
    /// Unbounded intervals must be clipped first.
    pub fn probe_mesh(&self, spacing: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        for i in &self.intervals {
            if !i.hi.is_finite() {
                continue;
            }
            let steps = ((i.hi - i.lo) / spacing).ceil().max(0.0) as usize;
            if steps == 0 {
                pts.push(i.lo);
                continue;
            }
            let h = (i.hi - i.lo) / steps as f64;
            pts.extend((0..=steps).map(|k| i.lo + k as f64 * h));
        }
        pts
    }

    /// `sup` over the probe mesh of the distance to the sorted `eigenvalues`.
    pub fn one_sided_hausdorff(&self, eigenvalues: &[f64], spacing: f64) -> f64 {
        self.probe_mesh(spacing)
            .into_iter()
            .map(|p| nearest_distance(eigenvalues, p))
            .fold(0.0, f64::max)
    }
}

/// Distance from `v` to the nearest entry of an ascending slice.
pub fn nearest_distance(sorted: &[f64], v: f64) -> f64 {
    if sorted.is_empty() {
        return f64::INFINITY;
    }
    let k = sorted.partition_point(|&x| x < v);
    let mut d = f64::INFINITY;
    if k < sorted.len() {
        d = d.min((sorted[k] - v).abs());
    }
    if k > 0 {
        d = d.min((v - sorted[k - 1]).abs());
    }
    d
}
