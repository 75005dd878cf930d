use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five attribute classes carried by every SME, in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Revenue,
    Shareholder,
    Mortgage,
    Recruitment,
    Patent,
}

impl Attribute {
    pub const ALL: [Attribute; 5] =
        [Attribute::Revenue, Attribute::Shareholder, Attribute::Mortgage, Attribute::Recruitment, Attribute::Patent];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Revenue => "revenue",
            Attribute::Shareholder => "shareholder",
            Attribute::Mortgage => "mortgage",
            Attribute::Recruitment => "recruitment",
            Attribute::Patent => "patent",
        }
    }

    pub fn index(self) -> usize {
        Attribute::ALL.iter().position(|&a| a == self).expect("listed")
    }
}

impl std::str::FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown attribute `{s}`")))
    }
}

/// Probability that each attribute is present on an SME.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Availability {
    pub revenue: f64,
    pub shareholder: f64,
    pub mortgage: f64,
    pub recruitment: f64,
    pub patent: f64,
}

impl Availability {
    pub fn get(&self, a: Attribute) -> f64 {
        match a {
            Attribute::Revenue => self.revenue,
            Attribute::Shareholder => self.shareholder,
            Attribute::Mortgage => self.mortgage,
            Attribute::Recruitment => self.recruitment,
            Attribute::Patent => self.patent,
        }
    }
}

/// Generator settings. Every field has the value of the preset named by
/// `preset` unless the config file overrides it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub preset: String,
    pub seed: u64,
    pub num_smes: usize,
    /// Upstream, mid and downstream shares of the SMEs.
    pub tier_shares: [f64; 3],
    /// Each buyer draws a supplier from each of its `supplier_pool` nearest
    /// previous-tier SMEs with this probability, scaled by its own size.
    pub supply_density: f64,
    pub supplier_pool: usize,
    /// Log-normal sigma of firm size; size scales both supplier demand and
    /// attractiveness as a supplier.
    pub size_sigma: f64,
    /// Fraction of supply edges withheld from the observed graph.
    pub hidden_fraction: f64,
    /// Fraction of SMEs whose trade is largely invisible to the platform.
    pub offline_fraction: f64,
    pub offline_visibility: f64,
    pub online_visibility: f64,
    /// Edge (u, v) is withheld with weight `(1 - vis_u * vis_v)^hiding_exponent`.
    pub hiding_exponent: f64,
    /// Fraction of SMEs tied to a shared owner.
    pub social_tie_density: f64,
    pub owner_group_size: usize,
    /// Gaussian noise on the position features.
    pub position_noise: f64,
    /// Probability that the tier one-hot shows a random tier.
    pub tier_noise: f64,
    pub availability: Availability,
    /// Patents are held by clusters of this many neighbouring SMEs rather
    /// than by independent firms.
    pub patent_cluster_size: usize,
    /// Extra shareholder availability for SMEs with an owner tie.
    pub social_shareholder_boost: f64,
    /// Per-tier standard deviation of the revenue signal.
    pub revenue_sd: [f64; 3],
    /// Weight of log firm size in the revenue signal.
    pub revenue_size_loading: f64,
    /// Default log-odds: `base - protection * partners + noise_sd * N(0, 1)`,
    /// `partners` being the true supply-partner count.
    pub default_base: f64,
    pub default_protection: f64,
    pub default_noise_sd: f64,
}

pub const PAPER_CALIBRATED: &str = "paper-calibrated";
pub const NULL_PRESET: &str = "null";
pub const TOY_PRESET: &str = "toy";
pub const PRESETS: [&str; 3] = [PAPER_CALIBRATED, NULL_PRESET, TOY_PRESET];

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::paper_calibrated()
    }
}

impl GenConfig {
    /// Calibrated so the observed economy shows the supply-chain/risk and
    /// attribute-availability patterns reported for real SME graphs.
    pub fn paper_calibrated() -> Self {
        GenConfig {
            preset: PAPER_CALIBRATED.into(),
            seed: 7,
            num_smes: 5000,
            tier_shares: [0.3, 0.4, 0.3],
            supply_density: 0.12,
            supplier_pool: 30,
            size_sigma: 0.6,
            hidden_fraction: 0.3,
            offline_fraction: 0.2,
            offline_visibility: 0.05,
            online_visibility: 0.9,
            hiding_exponent: 3.0,
            social_tie_density: 0.3,
            owner_group_size: 3,
            position_noise: 0.01,
            tier_noise: 0.05,
            availability: Availability {
                revenue: 0.55,
                shareholder: 0.35,
                mortgage: 0.01,
                recruitment: 0.06,
                patent: 0.0026,
            },
            patent_cluster_size: 3,
            social_shareholder_boost: 0.15,
            revenue_sd: [2.0, 1.3, 0.8],
            revenue_size_loading: 0.3,
            default_base: 1.3,
            default_protection: 0.7,
            default_noise_sd: 0.5,
        }
    }

    /// Calibrated economy with the partner-count protection switched off.
    pub fn null() -> Self {
        GenConfig {
            preset: NULL_PRESET.into(),
            default_protection: 0.0,
            default_base: -1.0,
            ..GenConfig::paper_calibrated()
        }
    }

    /// A few hundred SMEs, for examples and fast tests.
    pub fn toy() -> Self {
        GenConfig { preset: TOY_PRESET.into(), num_smes: 300, ..GenConfig::paper_calibrated() }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            PAPER_CALIBRATED => Ok(Self::paper_calibrated()),
            NULL_PRESET => Ok(Self::null()),
            TOY_PRESET => Ok(Self::toy()),
            other => {
                Err(Error::InvalidConfig(format!("unknown preset `{other}`; known presets: {}", PRESETS.join(", "))))
            }
        }
    }

    /// Parses a TOML config. Keys absent from the file take the value of the
    /// preset it names (`paper-calibrated` when it names none).
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        // The first pass reports unknown keys and type errors with their
        // positions; the second fills unspecified keys from the preset.
        let parsed: GenConfig = toml::from_str(text)?;
        let Ok(base) = GenConfig::preset(&parsed.preset) else {
            return Ok(parsed);
        };
        let user: toml::Table = text.parse()?;
        let mut merged = toml::Table::try_from(&base).expect("config serializes");
        for (k, v) in user {
            merged.insert(k, v);
        }
        merged.try_into()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        GenConfig::preset(&self.preset)?;
        let unit_open = |v: f64| v > 0.0 && v < 1.0;
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if self.num_smes < 10 {
            return bad(format!("num_smes must be at least 10, got {}", self.num_smes));
        }
        if self.tier_shares.iter().any(|&s| s.is_nan() || s <= 0.0)
            || (self.tier_shares.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad(format!("tier_shares must be positive and sum to 1, got {:?}", self.tier_shares));
        }
        for (name, v) in [
            ("supply_density", self.supply_density),
            ("hidden_fraction", self.hidden_fraction),
            ("social_tie_density", self.social_tie_density),
        ] {
            if !unit_open(v) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        for (name, v) in [
            ("offline_fraction", self.offline_fraction),
            ("offline_visibility", self.offline_visibility),
            ("online_visibility", self.online_visibility),
            ("tier_noise", self.tier_noise),
            ("social_shareholder_boost", self.social_shareholder_boost),
        ] {
            if !prob(v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        for a in Attribute::ALL {
            if !prob(self.availability.get(a)) {
                return bad(format!("availability.{} must lie in [0, 1]", a.name()));
            }
        }
        for (name, v) in [
            ("size_sigma", self.size_sigma),
            ("hiding_exponent", self.hiding_exponent),
            ("position_noise", self.position_noise),
            ("revenue_size_loading", self.revenue_size_loading),
            ("default_protection", self.default_protection),
            ("default_noise_sd", self.default_noise_sd),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.default_base.is_finite() || self.revenue_sd.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("default_base and revenue_sd must be finite (revenue_sd >= 0)".into());
        }
        if self.patent_cluster_size == 0 || self.patent_cluster_size > self.num_smes {
            return bad(format!("patent_cluster_size must be in 1..=num_smes, got {}", self.patent_cluster_size));
        }
        if self.owner_group_size < 2 {
            return bad(format!("owner_group_size must be at least 2, got {}", self.owner_group_size));
        }
        let smallest_tier = self.tier_sizes().into_iter().min().unwrap_or(0);
        if self.supplier_pool == 0 || self.supplier_pool > smallest_tier {
            return bad(format!(
                "supplier_pool {} must be between 1 and the smallest tier size {smallest_tier}; \
                 a larger pool would force repeated supplier draws",
                self.supplier_pool
            ));
        }
        if self.owner_group_size > self.num_smes {
            return bad("owner_group_size exceeds num_smes".into());
        }
        Ok(())
    }

    /// SMEs per tier; rounding remainder goes to the mid tier.
    pub fn tier_sizes(&self) -> [usize; 3] {
        let up = (self.tier_shares[0] * self.num_smes as f64).round() as usize;
        let down = (self.tier_shares[2] * self.num_smes as f64).round() as usize;
        [up, self.num_smes.saturating_sub(up + down), down]
    }
}
