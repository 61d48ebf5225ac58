#![allow(dead_code)]

use sweetspot_core::acoustics::{Medium, SourceSpec, SpeakerArray};
use sweetspot_core::optimizer::{Atom, Grid};
use sweetspot_core::psychoacoustics::{DirectionSet, LoudnessModel, VanDeParParams};
use sweetspot_core::scenario::Scenario;
use sweetspot_core::Position;

pub fn scenario(array: SpeakerArray, source: Position, level_db: f64, grid: Grid) -> Scenario {
    Scenario {
        medium: Medium::default(),
        array,
        array_center: Position::ORIGIN,
        source: SourceSpec { position: source, level_db_spl: level_db, f_star: 343.0, sigma: 5.0 },
        grid,
        detectability: VanDeParParams::default(),
        loudness: LoudnessModel::flat_default(),
        directions: DirectionSet::FacingPoint(source),
    }
}

/// 20 loudspeakers on a 2.5 m circle with a lattice over the inner disk.
pub fn desk(source: Position, level_db: f64, spacing: f64) -> Scenario {
    let array = SpeakerArray::circular(Position::ORIGIN, 2.5, 20, 0.0).unwrap();
    let mut avoid = array.positions().to_vec();
    avoid.push(source);
    let grid = Grid::disk_lattice(Position::ORIGIN, 2.4975, spacing, &avoid, 0.1).unwrap();
    scenario(array, source, level_db, grid)
}

pub fn near_field(spacing: f64) -> Scenario {
    desk(Position::new(0.0, 5.0, 0.0), 68.0, spacing)
}

pub fn focus(spacing: f64) -> Scenario {
    desk(Position::new(0.0, 0.82, 0.0), 60.0, spacing)
}

pub fn unit_atoms(points: &[(f64, f64)]) -> Grid {
    Grid::new(points.iter().map(|&(x, y)| Atom { position: Position::new(x, y, 0.0), weight: 1.0 }).collect()).unwrap()
}
