use std::io::Write;

use super::fmt_f64;
use crate::circuits::RegisterLayout;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::simulator::QuantumState;

/// `p(i, j)` over the `N × 2N` lattice, summed over every other register.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDensity {
    pub n_q: u32,
    /// Indexed by [`LatticePoint::index`].
    pub p: Vec<f64>,
}

pub fn position_density(state: &QuantumState, layout: &RegisterLayout) -> Result<PositionDensity> {
    let n_q = layout.n_q();
    if state.qubit_count() > layout.qubit_count() {
        return Err(Error::Dimension(format!(
            "{}-qubit state is wider than the {}-qubit layout",
            state.qubit_count(),
            layout.qubit_count()
        )));
    }
    let block = layout.main_block();
    let mut p = vec![0.0; 1usize << (2 * n_q + 1)];
    state.for_each(|v, a| {
        let pt = block.decode(v);
        p[pt.index(n_q)] += a.norm_sqr();
    });
    Ok(PositionDensity { n_q, p })
}

impl PositionDensity {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn get(&self, pt: LatticePoint) -> f64 {
        self.p[pt.index(self.n_q)]
    }

    /// Cells with probability above `threshold`, in index order.
    pub fn support(&self, threshold: f64) -> Vec<LatticePoint> {
        self.p
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(k, _)| LatticePoint::from_index(k, self.n_q))
            .collect()
    }

    /// CSV with header `i,j,p`, one row per lattice cell.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "i,j,p")?;
        for (k, &v) in self.p.iter().enumerate() {
            let pt = LatticePoint::from_index(k, self.n_q);
            writeln!(w, "{},{},{}", pt.i, pt.j, fmt_f64(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ImageSet;
    use crate::simulator::prepare_image;

    #[test]
    fn initial_image_is_uniform() {
        let layout = RegisterLayout::new(3, 2).unwrap();
        let image = ImageSet::default_disk(3).unwrap();
        let s = QuantumState::Sparse(prepare_image(&image, &layout).unwrap());
        let d = position_density(&s, &layout).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        for p in image.points() {
            assert!((d.get(*p) - 1.0 / image.len() as f64).abs() < 1e-15);
        }
        assert_eq!(d.support(0.0), image.points());
    }
}
