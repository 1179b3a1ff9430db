use std::collections::BTreeMap;

use crate::kernel::{assemble, Cholesky, Dof, KernelError, StructModel};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

const LEVEL_QUANTUM: f64 = 1e-6;
const STATIC_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftResult {
    pub max_drift_ratio: f64,
    /// Number of stories checked.
    pub stories: usize,
}

/// Static base shear `factor · pga · g · Σ m_x`, newtons.
pub fn base_shear(model: &StructModel, pga: f64, factor: f64) -> f64 {
    factor * pga * GRAVITY * model.total_mass(Dof::Ux)
}

fn level_key(y: f64) -> i64 {
    (y / LEVEL_QUANTUM).round() as i64
}

/// Applies an inverted-triangular lateral load summing to `base_shear`, solves
/// `K u = f`, and returns the largest inter-story drift ratio. Levels are the
/// distinct node elevations; a level's displacement is the mean lateral
/// displacement of its nodes.
pub fn drift_proxy(model: &StructModel, base_shear: f64) -> Result<DriftResult, KernelError> {
    let asm = assemble(model)?;

    let mut levels: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for (&tag, &(_, y)) in &model.nodes {
        levels.entry(level_key(y)).or_default().push(tag);
    }
    let elevation = |key: i64| key as f64 * LEVEL_QUANTUM;
    let base = *levels.keys().next().ok_or(KernelError::EmptyModel)?;

    let lateral_mass = |tag: i64| {
        if asm.index_of(tag, Dof::Ux).is_some() {
            model.masses.get(&(tag, Dof::Ux)).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };

    let mut weight_sum = 0.0;
    for (&key, tags) in &levels {
        if tags.iter().any(|&t| lateral_mass(t) > 0.0) {
            weight_sum += elevation(key) - elevation(base);
        }
    }
    if !(weight_sum > 0.0) {
        return Err(KernelError::NoMass);
    }

    let mut f = vec![0.0; asm.dofs.len()];
    for (&key, tags) in &levels {
        let level_mass: f64 = tags.iter().map(|&t| lateral_mass(t)).sum();
        if level_mass <= 0.0 {
            continue;
        }
        let level_force = base_shear * (elevation(key) - elevation(base)) / weight_sum;
        for &t in tags {
            let share = lateral_mass(t);
            if share > 0.0 {
                let idx = asm.index_of(t, Dof::Ux).expect("massed DOF is free");
                f[idx] += level_force * share / level_mass;
            }
        }
    }

    let chol = Cholesky::factor(&asm.k, STATIC_PIVOT_TOL).ok_or(KernelError::SingularStiffness)?;
    let u = chol.solve(&f);

    let mut max_ratio: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&key, tags) in &levels {
        let disp = tags
            .iter()
            .map(|&t| asm.index_of(t, Dof::Ux).map_or(0.0, |i| u[i]))
            .sum::<f64>()
            / tags.len() as f64;
        let y = elevation(key);
        if let Some((py, pu)) = prev {
            max_ratio = max_ratio.max((disp - pu).abs() / (y - py));
        }
        prev = Some((y, disp));
    }
    Ok(DriftResult {
        max_drift_ratio: max_ratio,
        stories: levels.len() - 1,
    })
}
