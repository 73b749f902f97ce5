/// Budgets and ceilings shared by the engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Largest modulus whose whole functional graph is enumerated.
    pub enumeration_ceiling: u64,
    /// Largest tail + cycle length an orbit walk may have.
    pub max_orbit_steps: u64,
    /// Orbits up to this length are kept in memory for random access.
    pub orbit_cache_bound: u64,
    /// Cap on literal iteration counts (oracle mode).
    pub literal_budget: u64,
    /// Steps of exact integer orbit walking when looking for preperiodicity.
    pub preperiodic_budget: u64,
    /// Maximal depth of modulus recursions and period chains.
    pub max_depth: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            enumeration_ceiling: 1_000_000,
            max_orbit_steps: 1 << 25,
            orbit_cache_bound: 1 << 22,
            literal_budget: 10_000_000,
            preperiodic_budget: 100_000,
            max_depth: 4096,
        }
    }
}
