//! Plug-in Σ on a lattice of i.i.d. normals, where the limit is diagonal with
//! entries 2 at the zero lag and 1 elsewhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stcov::asymcov::{sigma_lattice_plugin, PluginWindow};
use stcov::datasets::{LagSet, LatticeDataset, SpaceTimeLag};

fn main() -> stcov::Result<()> {
    let (nx, ny, nt) = (25, 25, 80);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vals: Vec<f64> = (0..nx * ny * nt).map(|_| rng.sample(StandardNormal)).collect();
    let data = LatticeDataset::full_box(nx, ny, nt, |p| {
        vals[p[0] as usize + nx * (p[1] as usize + ny * (p[2] as usize - 1))]
    });
    let lags = LagSet::new(vec![SpaceTimeLag::zero(), SpaceTimeLag::new([1.0, 0.0], 1)?])?;
    let sigma = sigma_lattice_plugin(&data, &lags, PluginWindow { spatial: 1, temporal: 2 })?;
    println!("{sigma}");
    println!("smallest eigenvalue {:.4}", sigma.smallest_eigenvalue());
    Ok(())
}
