use std::f64::consts::PI;

use homotopy_recon::shapes::Shape;
use homotopy_recon::{Error, Result};

/// Parses `name[:arg[:arg]]`, e.g. `circle`, `circle:2`, `sphere:3:1.5`,
/// `square:1`, `two-segments:1.2`, `segment:2`.
pub fn parse_shape(spec: &str) -> Result<Shape> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<f64> = parts
        .map(|p| p.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("shape argument {p:?}: {e}"))))
        .collect::<Result<_>>()?;
    let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
    let max_args = match name {
        "sphere" => 2,
        _ => 1,
    };
    if args.len() > max_args {
        return Err(Error::InvalidArgument(format!("too many arguments in shape {spec:?}")));
    }
    match name {
        "circle" => Shape::circle(arg(0, 1.0)),
        "semicircle" => Shape::semicircle(arg(0, 1.0)),
        "sphere" => {
            let dim = arg(0, 3.0);
            if dim.fract() != 0.0 || dim < 2.0 {
                return Err(Error::InvalidArgument(format!("sphere dimension must be an integer >= 2, got {dim}")));
            }
            Shape::sphere(dim as usize, arg(1, 1.0))
        }
        "square" => Shape::square_boundary(arg(0, 1.0)),
        "two-segments" => Shape::two_segments(arg(0, PI / 2.0)),
        "segment" => Shape::segment(vec![0.0, 0.0], vec![arg(0, 1.0), 0.0]),
        _ => Err(Error::InvalidArgument(format!("unknown shape {name:?}"))),
    }
}
