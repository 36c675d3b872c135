use std::str::FromStr;

use lightning_stokes::evaluation::BoundingBox;

use crate::CliError;

/// Grid request of the form `NXxNY,x0:x1,y0:y1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bbox: BoundingBox,
}

fn range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("expected `lo:hi`, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Usage(format!("range `{text}` must satisfy lo < hi")));
    }
    Ok((lo, hi))
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(',').collect();
        let [size, xr, yr] = parts[..] else {
            return Err(CliError::Usage(format!(
                "grid must look like NXxNY,x0:x1,y0:y1, got `{text}`"
            )));
        };
        let bad = || CliError::Usage(format!("grid size must look like NXxNY, got `{size}`"));
        let (nx, ny) = size.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx: usize = nx.trim().parse().map_err(|_| bad())?;
        let ny: usize = ny.trim().parse().map_err(|_| bad())?;
        if nx < 2 || ny < 2 {
            return Err(CliError::Usage("grid needs at least 2 points per direction".into()));
        }
        let (x_min, x_max) = range(xr)?;
        let (y_min, y_max) = range(yr)?;
        Ok(GridSpec {
            nx,
            ny,
            bbox: BoundingBox { x_min, x_max, y_min, y_max },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_grid() {
        let g: GridSpec = "600x300,-2:4,-1:1".parse().unwrap();
        assert_eq!((g.nx, g.ny), (600, 300));
        assert_eq!(g.bbox, BoundingBox { x_min: -2.0, x_max: 4.0, y_min: -1.0, y_max: 1.0 });
    }

    #[test]
    fn rejects_malformed_grids() {
        for bad in ["600x300", "600,0:1,0:1", "1x5,0:1,0:1", "4x4,1:0,0:1", "4x4,0:1,0;1", "axb,0:1,0:1"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
