use super::{FaultMap, FaultMapError, SramGeometry};

/// Per-bit fault frequency over a set of maps, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub geometry: SramGeometry,
    pub maps: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn get(&self, row: u32, col: u32) -> f64 {
        self.values[row as usize * self.geometry.cols as usize + col as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_means(&self) -> Vec<f64> {
        let cols = self.geometry.cols as usize;
        self.values
            .chunks(cols)
            .map(|r| r.iter().sum::<f64>() / cols as f64)
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn probability_heatmap<'a, I>(maps: I) -> Result<Heatmap, FaultMapError>
where
    I: IntoIterator<Item = &'a FaultMap>,
{
    let mut iter = maps.into_iter();
    let first = iter.next().ok_or(FaultMapError::EmptyCorpus)?;
    let geometry = first.geometry();
    let mut counts = vec![0u64; geometry.capacity()];
    let mut n = 0usize;
    for map in std::iter::once(first).chain(iter) {
        if map.geometry() != geometry {
            return Err(FaultMapError::MixedGeometry);
        }
        for loc in map.locations() {
            counts[geometry.linear(loc)] += 1;
        }
        n += 1;
    }
    Ok(Heatmap {
        geometry,
        maps: n,
        values: counts.into_iter().map(|c| c as f64 / n as f64).collect(),
    })
}
