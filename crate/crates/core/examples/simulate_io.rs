//! Round trip of simulated station and point data through CSV files.

use stcov::datasets::{load_point_csv, load_station_csv, save_point_csv, save_station_csv, PointMode, RegionSpec};
use stcov::simulate::{build_var_model, sample_poisson, simulate_st_field, simulate_var, GaussianFieldSpec};

fn main() -> stcov::Result<()> {
    let dir = std::env::temp_dir().join("stcov-example");
    std::fs::create_dir_all(&dir)?;

    let stations = simulate_var(&build_var_model(3, 1.0, 0.2, 0.1)?, 50, 1)?;
    let path = dir.join("stations.csv");
    save_station_csv(&stations, &path)?;
    let back = load_station_csv(&path)?;
    println!("stations: {} sites × {} times, identical: {}", back.n_sites(), back.n_times(), back == stations);

    let region = RegionSpec::square(5.0, 4)?;
    let sites: Vec<[f64; 2]> = sample_poisson(&region, 1.0, 2)?.iter().map(|p| [p[0], p[1]]).collect();
    let points = simulate_st_field(&GaussianFieldSpec::exponential(1.0, 1.0, 1.0)?, &sites, &region, 3)?;
    let path = dir.join("points.csv");
    save_point_csv(&points, &path)?;
    let back = load_point_csv(&path, PointMode::SpaceTime, region)?;
    println!("points: {} marks at {} locations, written to {}", back.len(), back.n_locations(), path.display());
    Ok(())
}
