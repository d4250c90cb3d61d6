/// One experiment kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Result the experiment probes.
    pub anchor: &'static str,
}

pub const REGISTRY: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "partition",
        description: "residual of the dyadic partition of unity on every lattice frequency",
        anchor: "dyadic decomposition of unity",
    },
    ExperimentInfo {
        name: "mode-ode",
        description: "finite-difference residual of the damped mode equation for the kernel",
        anchor: "closed form of the linear propagator symbol",
    },
    ExperimentInfo {
        name: "verify-lp-lq",
        description: "decay of D(t)g in Lebesgue or Besov norms with fitted exponents",
        anchor: "Lp-Lq decay estimate for the damped wave propagator",
    },
    ExperimentInfo {
        name: "block-estimate",
        description: "per-block constants of the dyadic propagator estimates",
        anchor: "single-block low/high frequency estimates",
    },
    ExperimentInfo {
        name: "paraproduct-residual",
        description: "relative residual of T_f g + T_g f + R(f,g) = fg on random pairs",
        anchor: "Bony paraproduct decomposition of a product",
    },
    ExperimentInfo {
        name: "leibniz",
        description: "fractional Leibniz ratio over a random ensemble at two resolutions",
        anchor: "fractional Leibniz rule in homogeneous Besov spaces",
    },
    ExperimentInfo {
        name: "contraction",
        description: "Picard contraction ratios against data amplitude and horizon",
        anchor: "difference estimate making the Duhamel map a contraction",
    },
    ExperimentInfo {
        name: "decay",
        description: "Picard solve with exponential-integrator cross-check and decay fits",
        anchor: "small-data global existence at or above the critical power",
    },
    ExperimentInfo {
        name: "blowup-probe",
        description: "escape time of the exponential integrator at two resolutions",
        anchor: "Fujita critical exponent (qualitative)",
    },
    ExperimentInfo {
        name: "sweep-critical",
        description: "escape-versus-decay verdicts over a range of powers",
        anchor: "critical power 1 + 2r/n separating decay from escape",
    },
    ExperimentInfo {
        name: "admissibility",
        description: "parameter conditions, margins and the smallest admissible s",
        anchor: "hypotheses of local and global well-posedness",
    },
];

pub fn find(name: &str) -> Option<&'static ExperimentInfo> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// One line per experiment: name, description and anchor.
pub fn listing() -> String {
    let width = REGISTRY.iter().map(|e| e.name.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|e| format!("{:width$}  {} [{}]\n", e.name, e.description, e.anchor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_listed() {
        let l = listing();
        for e in REGISTRY {
            assert_eq!(REGISTRY.iter().filter(|o| o.name == e.name).count(), 1);
            assert!(l.contains(e.name));
        }
        assert!(find("verify-lp-lq").is_some());
        assert!(find("nope").is_none());
    }
}
