use crate::error::{Error, Result};

/// Construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HnswParams {
    /// Neighbor cap on layers above 0.
    pub m: usize,
    /// Neighbor cap on layer 0.
    pub m0: usize,
    /// Candidate pool size while inserting.
    pub ef_construction: usize,
    /// Multiplier applied to `-ln(u)` when sampling a node's level.
    pub level_scale: f64,
    /// Seed of the level-sampling stream.
    pub seed: u64,
}

impl HnswParams {
    /// `m0 = 2m` and `level_scale = 1/ln(m)`; the seed defaults to 0.
    pub fn new(m: usize, ef_construction: usize) -> Result<Self> {
        let params = HnswParams {
            m,
            m0: m.saturating_mul(2),
            ef_construction,
            level_scale: 1.0 / (m as f64).ln(),
            seed: 0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid(format!("m must be at least 2, got {}", self.m)));
        }
        if self.m0 < self.m {
            return Err(Error::invalid(format!("m0 ({}) must be at least m ({})", self.m0, self.m)));
        }
        if self.ef_construction < self.m {
            return Err(Error::invalid(format!(
                "ef_construction ({}) must be at least m ({})",
                self.ef_construction, self.m
            )));
        }
        if !(self.level_scale.is_finite() && self.level_scale > 0.0) {
            return Err(Error::invalid(format!("level_scale must be positive, got {}", self.level_scale)));
        }
        if self.m0 >= u32::MAX as usize || self.ef_construction >= u32::MAX as usize {
            return Err(Error::invalid("neighbor caps must fit in 32 bits"));
        }
        Ok(())
    }
}

impl Default for HnswParams {
    /// M=16, efConstruction=100, level seed drawn from entropy.
    fn default() -> Self {
        HnswParams::new(16, 100).expect("default parameters are valid").with_seed(rand::random())
    }
}

/// Query-time parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub k: usize,
    pub ef_search: usize,
}

impl SearchParams {
    /// `ef_search` below `k` is raised to `k` with a warning.
    pub fn new(k: usize, ef_search: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if ef_search == 0 {
            return Err(Error::invalid("ef_search must be at least 1"));
        }
        if ef_search < k {
            log::warn!("ef_search {ef_search} is below k {k}; using ef_search = {k}");
        }
        Ok(SearchParams { k, ef_search: ef_search.max(k) })
    }
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { k: 1000, ef_search: 1000 }
    }
}
