//! Generator specs (`NAME:PARAMS`), sweep families and parameter grids.

use entlab_core::experiments::batch_state;
use entlab_core::states::{
    bell_state, gen_bell_diagonal, gen_random_density, gen_random_pure, gen_werner, Bell, DensityMatrix,
};

use crate::CliError;

fn number<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::input(format!("{what}: cannot parse `{s}`")))
}

fn arity(spec: &str, params: &[&str], expected: usize) -> Result<(), CliError> {
    if params.len() != expected {
        return Err(CliError::input(format!(
            "generator `{spec}`: expected {expected} parameter(s), found {}",
            params.len()
        )));
    }
    Ok(())
}

/// Builds a state from a generator spec:
///
/// - `werner:P`
/// - `bell-diagonal:W1:W2:W3:W4` (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻ weights)
/// - `bell:phi+|phi-|psi+|psi-`, `singlet`
/// - `mixed` or `mixed:DA:DB`
/// - `random:RANK:SEED` (2⊗2) or `random:DA:DB:RANK:SEED`
/// - `random-pure:SEED` (2⊗2) or `random-pure:DA:DB:SEED`
/// - `batch:SEED:INDEX`, item `INDEX` of the verification batch
pub fn generate(spec: &str) -> Result<DensityMatrix, CliError> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default().trim().to_ascii_lowercase();
    let params: Vec<&str> = parts.collect();
    let rho = match name.as_str() {
        "werner" => {
            arity(spec, &params, 1)?;
            gen_werner(number("werner weight", params[0])?)?
        }
        "bell-diagonal" | "bell_diagonal" => {
            arity(spec, &params, 4)?;
            let mut w = [0.0; 4];
            for (slot, p) in w.iter_mut().zip(&params) {
                *slot = number("Bell weight", p)?;
            }
            gen_bell_diagonal(w)?
        }
        "singlet" => {
            arity(spec, &params, 0)?;
            bell_state(Bell::PsiMinus).density()
        }
        "bell" => {
            arity(spec, &params, 1)?;
            let which = match params[0].trim().to_ascii_lowercase().as_str() {
                "phi+" => Bell::PhiPlus,
                "phi-" => Bell::PhiMinus,
                "psi+" => Bell::PsiPlus,
                "psi-" => Bell::PsiMinus,
                other => return Err(CliError::input(format!("unknown Bell state `{other}`"))),
            };
            bell_state(which).density()
        }
        "mixed" => match params.len() {
            0 => DensityMatrix::maximally_mixed(&[2, 2]),
            2 => DensityMatrix::maximally_mixed(&[number("dimension", params[0])?, number("dimension", params[1])?]),
            _ => return Err(CliError::input(format!("generator `{spec}`: expected 0 or 2 parameters"))),
        },
        "random" => match params.len() {
            2 => gen_random_density(&[2, 2], number("rank", params[0])?, number("seed", params[1])?)?,
            4 => {
                let dims = [number("dimension", params[0])?, number("dimension", params[1])?];
                gen_random_density(&dims, number("rank", params[2])?, number("seed", params[3])?)?
            }
            _ => return Err(CliError::input(format!("generator `{spec}`: expected RANK:SEED or DA:DB:RANK:SEED"))),
        },
        "random-pure" | "random_pure" => match params.len() {
            1 => gen_random_pure(&[2, 2], number("seed", params[0])?)?.density(),
            3 => {
                let dims = [number("dimension", params[0])?, number("dimension", params[1])?];
                gen_random_pure(&dims, number("seed", params[2])?)?.density()
            }
            _ => return Err(CliError::input(format!("generator `{spec}`: expected SEED or DA:DB:SEED"))),
        },
        "batch" => {
            arity(spec, &params, 2)?;
            batch_state(number("seed", params[0])?, number("index", params[1])?)
        }
        _ => return Err(CliError::input(format!("unknown generator `{name}`"))),
    };
    Ok(rho)
}

/// One-parameter families for `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`.
    Werner,
    /// `p |Φ⁺⟩⟨Φ⁺| + (1 − p) |Φ⁻⟩⟨Φ⁻|`.
    #[value(name = "bell-diagonal", alias = "bell_diagonal")]
    BellDiagonal,
    /// Batch state number `param` under the run seed.
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::BellDiagonal => "bell-diagonal",
            Family::Random => "random",
        }
    }

    pub fn state(self, param: f64, seed: u64) -> Result<DensityMatrix, CliError> {
        Ok(match self {
            Family::Werner => gen_werner(param)?,
            Family::BellDiagonal => gen_bell_diagonal([param, 1.0 - param, 0.0, 0.0])?,
            Family::Random => {
                if !(param >= 0.0 && param.fract() == 0.0) {
                    return Err(CliError::input(format!("random family index {param} is not a nonnegative integer")));
                }
                batch_state(seed, param as u64)
            }
        })
    }
}

pub const MAX_GRID: usize = 100_000;

/// A grid `START:STOP:STEP` (inclusive of `STOP` up to rounding) or an
/// explicit comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::input("empty grid"));
    }
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::input(format!("grid `{spec}`: expected START:STOP:STEP")));
        }
        let start: f64 = number("grid start", parts[0])?;
        let stop: f64 = number("grid stop", parts[1])?;
        let step: f64 = number("grid step", parts[2])?;
        if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0) {
            return Err(CliError::input(format!("grid `{spec}`: bounds must be finite and the step positive")));
        }
        if stop < start {
            return Err(CliError::input(format!("grid `{spec}` is empty")));
        }
        let count = ((stop - start) / step + 1e-9).floor() + 1.0;
        if count > MAX_GRID as f64 {
            return Err(CliError::input(format!("grid `{spec}` has more than {MAX_GRID} points")));
        }
        (0..count as usize).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',')
            .map(|s| number("grid value", s))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::input("empty grid"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn same(a: &DensityMatrix, b: &DensityMatrix) -> bool {
        a.dims() == b.dims() && a.matrix().max_abs_diff(b.matrix()) < 1e-15
    }

    #[test]
    fn generators_build_expected_states() {
        assert!(same(&generate("werner:0").unwrap(), &DensityMatrix::maximally_mixed(&[2, 2])));
        assert!(same(&generate("mixed").unwrap(), &DensityMatrix::maximally_mixed(&[2, 2])));
        assert!(same(&generate("singlet").unwrap(), &generate("bell:psi-").unwrap()));
        assert!(same(&generate("werner:1").unwrap(), &generate("singlet").unwrap()));
        assert_eq!(generate("random:3:5").unwrap().rank(), 3);
        assert_eq!(generate("random:2:3:2:5").unwrap().dims(), &[2, 3]);
        assert_eq!(generate("random-pure:4").unwrap().rank(), 1);
        assert!(same(&generate("batch:7:3").unwrap(), &batch_state(7, 3)));
        let bd = generate("bell-diagonal:0.25:0.25:0.25:0.25").unwrap();
        assert!(bd.matrix().max_abs_diff(DensityMatrix::maximally_mixed(&[2, 2]).matrix()) < 1e-15);
    }

    #[test]
    fn bad_generators_are_input_errors() {
        for spec in ["werner", "werner:2", "werner:x", "bell:chi", "random:3", "nope:1", "bell-diagonal:1:0:0"] {
            assert!(generate(spec).is_err(), "{spec}");
        }
    }

    #[test]
    fn grids() {
        let g = parse_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert!((g[10] - 1.0).abs() < 1e-12);
        assert_eq!(parse_grid("0.5, 1").unwrap(), vec![0.5, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        for bad in ["", "  ", "1:0:0.1", "0:1:0", "0:1:-1", "0:1", "a,b", "0:inf:1"] {
            assert!(parse_grid(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn families() {
        assert!(same(&Family::Werner.state(1.0, 0).unwrap(), &generate("singlet").unwrap()));
        assert!(same(&Family::Random.state(2.0, 9).unwrap(), &batch_state(9, 2)));
        assert!(Family::Random.state(0.5, 9).is_err());
        assert!(Family::BellDiagonal.state(1.5, 0).is_err());
    }
}
