//! Everything derived from a [`RunConfig`] before any dynamics is run.

use crate::bounds::{shell_sum_numeric, velocity, BoundInputs, ShellOrigin};
use crate::error::{Error, Result};
use crate::geometry::{GrowthCertificate, MetricSpace};
use crate::lightcone::exponents;
use crate::model::{matrix_from_pairs, CouplingPattern, DecayProfile, Interaction};
use crate::quantum::{HilbertSpace, Observable, Pauli};

use super::config::{
    C0Source, InteractionConfig, LatticeConfig, OperatorConfig, PatternName, PauliName, ProfileChoice, RPolicy,
    RunConfig,
};

/// One position of `B` in the sweep.
#[derive(Debug, Clone)]
pub struct Placement {
    /// First site of `supp B`.
    pub site: usize,
    pub b: Observable,
    /// `d(supp A, supp B)`.
    pub r: f64,
}

#[derive(Debug, Clone)]
pub struct System {
    pub config: RunConfig,
    pub space: MetricSpace,
    /// Growth exponent `D`.
    pub dimension: f64,
    pub interaction: Interaction,
    pub a: Observable,
    /// Sorted by `(r, site)`.
    pub placements: Vec<Placement>,
    pub growth: GrowthCertificate,
    pub profile: DecayProfile,
    pub c0: f64,
    pub velocity: f64,
}

fn pauli(name: PauliName) -> Pauli {
    match name {
        PauliName::X => Pauli::X,
        PauliName::Y => Pauli::Y,
        PauliName::Z => Pauli::Z,
    }
}

fn operator(op: &OperatorConfig, site: usize) -> Result<Observable> {
    match op {
        OperatorConfig::Pauli { op, .. } => Ok(Observable::pauli(site, pauli(*op))),
        OperatorConfig::Matrix { sites, matrix } => Observable::new(sites.clone(), matrix_from_pairs(matrix)?),
    }
}

impl System {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let space = match &config.lattice {
            LatticeConfig::Chain { length } => MetricSpace::chain(*length)?,
            LatticeConfig::Grid { dimension, side } => MetricSpace::grid(*dimension, *side)?,
            LatticeConfig::Custom { distances, .. } => MetricSpace::from_table(distances)?,
        };
        let dimension = config.dimension();
        let interaction = match &config.interaction {
            InteractionConfig::PowerLawTwoBody { c1, alpha, pattern, .. } => {
                let pattern = match pattern {
                    PatternName::Ising => CouplingPattern::Ising,
                    PatternName::Xy => CouplingPattern::Xy,
                    PatternName::Heisenberg => CouplingPattern::Heisenberg,
                };
                Interaction::power_law_two_body(&space, *c1, *alpha, dimension, &pattern)?
            }
            InteractionConfig::Explicit { terms } => {
                let built = terms
                    .iter()
                    .map(|t| Ok((t.sites.clone(), matrix_from_pairs(&t.matrix)?)))
                    .collect::<Result<Vec<_>>>()?;
                Interaction::new(space.clone(), vec![2; space.len()], built)?
            }
        };

        let a_site = match config.observables.a {
            OperatorConfig::Pauli { site, .. } => site.unwrap_or(0),
            OperatorConfig::Matrix { .. } => 0,
        };
        let a = operator(&config.observables.a, a_site)?;
        let placements = Self::placements(config, &space, &a)?;

        let growth = space.fit_growth_constant(dimension)?;
        let profile = match config.bound.profile {
            ProfileChoice::Empirical => DecayProfile::empirical(&interaction),
            ProfileChoice::PowerLawFit => DecayProfile::fit_power_law(&interaction, config.alpha().unwrap_or(1.0))?,
        };
        let c0 = interaction.compute_c0();
        Ok(Self {
            config: config.clone(),
            space,
            dimension,
            interaction,
            a,
            placements,
            growth,
            profile,
            c0,
            velocity: velocity(c0),
        })
    }

    fn placements(config: &RunConfig, space: &MetricSpace, a: &Observable) -> Result<Vec<Placement>> {
        let sweep = &config.sweep;
        let explicit_sites = sweep.b_sites.is_some() || sweep.r_grid.is_some();
        let sites: Vec<usize> = match &config.observables.b {
            OperatorConfig::Matrix { sites, .. } => {
                if explicit_sites {
                    return Err(Error::validation(
                        "sweep",
                        "b_sites and r_grid need a single-site Pauli B; a matrix B stays where it is",
                    ));
                }
                vec![sites[0]]
            }
            OperatorConfig::Pauli { site, .. } => {
                if let Some(list) = &sweep.b_sites {
                    list.clone()
                } else if let Some(rs) = &sweep.r_grid {
                    let mut out = Vec::new();
                    for &r in rs {
                        let hits: Vec<usize> = space
                            .sites()
                            .filter(|&y| (space.dist_to_set(y, a.support()).unwrap() - r).abs() < 1e-9)
                            .collect();
                        if hits.is_empty() {
                            return Err(Error::validation("sweep.r_grid", format!("no site at distance {r} from A")));
                        }
                        out.extend(hits);
                    }
                    out
                } else if let Some(s) = site {
                    vec![*s]
                } else {
                    space.sites().filter(|s| !a.support().contains(s)).collect()
                }
            }
        };
        if sites.is_empty() {
            return Err(Error::validation("sweep", "no B placement left after excluding supp A"));
        }
        let mut out = Vec::with_capacity(sites.len());
        for site in sites {
            let b = operator(&config.observables.b, site)?;
            let r = space.set_distance(a.support(), b.support())?;
            out.push(Placement { site, b, r });
        }
        out.sort_by(|p, q| p.r.total_cmp(&q.r).then(p.site.cmp(&q.site)));
        out.dedup_by(|p, q| p.site == q.site);
        Ok(out)
    }

    pub fn hilbert(&self) -> Result<HilbertSpace> {
        HilbertSpace::new(self.interaction.local_dims().to_vec(), self.config.limits.dim_cap)
    }

    pub fn times(&self) -> Vec<f64> {
        self.config.sweep.t_grid.values()
    }

    pub fn kappa(&self) -> Option<f64> {
        exponents(self.dimension, self.config.alpha()?).ok().map(|e| e.kappa)
    }

    pub fn cutoff(&self, policy: &RPolicy, r: f64) -> Result<f64> {
        match policy {
            RPolicy::Fixed { value } => Ok(*value),
            RPolicy::KappaRule => {
                let kappa = self
                    .kappa()
                    .ok_or_else(|| Error::invalid("kappa_rule needs a power-law interaction with alpha > D"))?;
                Ok(r.powf(kappa).max(1.0))
            }
        }
    }

    /// `v` used by the three-term bound at cutoff `R`.
    pub fn bound_velocity(&self, cutoff: f64) -> Result<f64> {
        match self.config.bound.c0_source {
            C0Source::Full => Ok(self.velocity),
            C0Source::Truncated => Ok(velocity(self.interaction.decompose(cutoff)?.0.compute_c0())),
        }
    }

    pub fn bound_inputs(&self, b: &Observable, t: f64, r: f64, cutoff: f64) -> Result<BoundInputs> {
        let refined = self.config.bound.refined_exponent;
        Ok(BoundInputs {
            norm_a: self.a.norm(),
            norm_b: b.norm(),
            size_x: self.a.support().len(),
            t,
            r,
            cutoff,
            velocity: self.bound_velocity(cutoff)?,
            f_of_r: self.profile.f(cutoff),
            growth: self.growth,
            refined_exponent: refined,
            shell_sum: Some(shell_sum_numeric(
                &self.space,
                ShellOrigin::Sites(self.a.support()),
                r,
                cutoff,
                refined,
            )?),
            c2_override: self.config.bound.c2_override,
            integrated_time: self.config.bound.integrated_time,
        })
    }
}
