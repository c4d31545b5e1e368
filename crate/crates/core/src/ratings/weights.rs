use crate::data::{DesignMatrix, PlayerRegistry, Side};
use crate::error::{Error, Result};

use super::multinomial::{epts_player, epts_reference, MultinomialFit, SignConvention};

/// Share of the team's possessions on `side` with player `k` on court.
pub fn participation_weight(registry: &PlayerRegistry, k: usize, side: Side) -> Result<f64> {
    if k >= registry.len() {
        return Err(Error::UnknownPlayer(format!("player index {k} is not in the registry")));
    }
    let entry = registry.entry(k);
    let team = registry.team_possessions(&entry.team, side);
    if team == 0 {
        return Err(Error::Input(format!(
            "team {} has no {} possessions",
            entry.team,
            side.as_str()
        )));
    }
    Ok(entry.possessions(side) as f64 / team as f64)
}

/// `W·epts + (1 − W)·epts0`, exact at both ends of the weight range.
pub fn wepts(weight: f64, epts: f64, epts0: f64) -> f64 {
    if weight >= 1.0 {
        return epts;
    }
    if weight <= 0.0 || epts == epts0 {
        return epts0;
    }
    let v = epts0 + weight * (epts - epts0);
    v.clamp(epts.min(epts0), epts.max(epts0))
}

pub fn wepts_player(
    mfit: &MultinomialFit,
    x: &DesignMatrix,
    registry: &PlayerRegistry,
    k: usize,
    side: Side,
    convention: SignConvention,
) -> Result<f64> {
    let w = participation_weight(registry, k, side)?;
    let e = epts_player(mfit, x, k, side, convention)?;
    Ok(wepts(w, e, epts_reference(mfit)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries_and_midpoint() {
        assert_eq!(wepts(1.0, 1.8, 1.5), 1.8);
        assert_eq!(wepts(0.0, 1.8, 1.5), 1.5);
        assert!((wepts(0.5, 1.8, 1.5) - 1.65).abs() < 1e-15);
        assert_eq!(wepts(0.37, 1.5, 1.5), 1.5);
    }
}
