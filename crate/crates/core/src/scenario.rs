use num_complex::Complex64;

use crate::acoustics::{green, Medium, SourceSpec, SpeakerArray};
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::optimizer::Grid;
use crate::psychoacoustics::{DirectionSet, LoudnessModel, VanDeParParams};

/// Everything that defines one reproduction problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: Medium,
    pub array: SpeakerArray,
    pub array_center: Position,
    pub source: SourceSpec,
    pub grid: Grid,
    pub detectability: VanDeParParams,
    pub loudness: LoudnessModel,
    pub directions: DirectionSet,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.detectability.validate()?;
        self.directions.validate()?;
        if !(self.medium.speed_of_sound > 0.0) {
            return Err(Error::invalid("speed_of_sound", "must be positive"));
        }
        Ok(())
    }

    /// The virtual source sits closer to the array center than every loudspeaker.
    pub fn is_focus_source(&self) -> bool {
        let rs = self.source.position.distance(self.array_center);
        self.array.positions().iter().all(|x| x.distance(self.array_center) > rs)
    }

    /// Free-field target pressure `ĉ_0 G_0(f★, at)`.
    pub fn target_field(&self, at: Position) -> Result<Complex64> {
        Ok(self.source.gain() * green(self.source.f_star, self.source.position, at, &self.medium)?)
    }

    /// Focus sources only reproduce correctly where the field diverges from
    /// the focus point; `true` marks atoms on the converging side.
    pub fn is_convergent(&self, z: Position) -> bool {
        let x0 = self.source.position;
        (z - x0).dot(x0 - self.array_center) < 0.0
    }
}
