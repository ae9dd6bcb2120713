use std::path::{Path, PathBuf};

use hsbif::pde2d::{default_half_width, Cone, Grid2D, Profile};
use hsbif::{Error, ProblemParams, Result, SymmetryClass};
use serde::{Deserialize, Serialize};

/// Everything that determines a run. Reports embed it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: u32,
    pub s: f64,
    pub gamma: f64,
    /// Harmonic degree (`constants` table length, `spectrum` cut-off).
    pub j: Option<u32>,
    pub profile: Profile,
    /// Grid overrides on top of the profile.
    pub half_width: Option<f64>,
    pub mt: Option<usize>,
    pub mth: Option<usize>,
    /// Interval count of the one-dimensional problems.
    pub m: Option<usize>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub cones: Vec<Cone>,
    /// Degree of the degeneracy point a continuation starts from.
    pub from: Option<u32>,
    pub gamma_min: Option<f64>,
    pub steps: usize,
    pub symmetry: SymmetryClass,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            s: 0.0,
            gamma: 0.0,
            j: None,
            profile: Profile::Default,
            half_width: None,
            mt: None,
            mth: None,
            m: None,
            tol: 1e-9,
            out: None,
            cones: vec![Cone::K1Plus],
            from: None,
            gamma_min: None,
            steps: 400,
            symmetry: SymmetryClass::Axial,
        }
    }
}

/// Partial settings from one source (config file or flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<u32>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub j: Option<u32>,
    pub profile: Option<Profile>,
    pub half_width: Option<f64>,
    pub mt: Option<usize>,
    pub mth: Option<usize>,
    pub m: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub cones: Option<Vec<Cone>>,
    pub from: Option<u32>,
    pub gamma_min: Option<f64>,
    pub steps: Option<usize>,
    pub symmetry: Option<SymmetryClass>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value '{value}' for '{key}'")))
}

pub fn parse_cones(value: &str) -> Result<Vec<Cone>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(Cone::ALL.to_vec());
    }
    value.split(',').map(str::parse).collect()
}

/// `gamma1`, `gamma2`, ... or a bare degree.
pub fn parse_from(value: &str) -> Result<u32> {
    let v = value.trim().to_ascii_lowercase();
    let digits = v.strip_prefix("gamma").unwrap_or(&v);
    match digits.trim_start_matches('_').parse::<u32>() {
        Ok(j) if j >= 1 => Ok(j),
        _ => Err(Error::Parse(format!("bad value '{value}' for 'from'"))),
    }
}

impl Overrides {
    /// Set one key from its textual value. Keys match the long flag names, with `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "n" => self.n = Some(parse(&key, value)?),
            "s" => self.s = Some(parse(&key, value)?),
            "gamma" => self.gamma = Some(parse(&key, value)?),
            "j" => self.j = Some(parse(&key, value)?),
            "profile" => self.profile = Some(value.parse()?),
            "half_width" | "t" => self.half_width = Some(parse(&key, value)?),
            "mt" | "m_t" => self.mt = Some(parse(&key, value)?),
            "mth" | "m_theta" => self.mth = Some(parse(&key, value)?),
            "m" => self.m = Some(parse(&key, value)?),
            "tol" => self.tol = Some(parse(&key, value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "cone" | "cones" => self.cones = Some(parse_cones(value)?),
            "from" => self.from = Some(parse_from(value)?),
            "gamma_min" => self.gamma_min = Some(parse(&key, value)?),
            "steps" => self.steps = Some(parse(&key, value)?),
            "symmetry" => self.symmetry = Some(value.parse()?),
            _ => return Err(Error::Parse(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Flat key-value file; section headers are accepted and ignored.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut o = Self::default();
        for (_, props) in ini.iter() {
            for (k, v) in props.iter() {
                o.set(k, v)?;
            }
        }
        Ok(o)
    }

    pub fn from_ini_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    pub fn apply(self, c: &mut RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { c.$f = v; })*};
        }
        macro_rules! take_opt {
            ($($f:ident),*) => {$(if self.$f.is_some() { c.$f = self.$f; })*};
        }
        take!(n, s, gamma, profile, tol, cones, steps, symmetry);
        take_opt!(j, half_width, mt, mth, m, out, from, gamma_min);
    }
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(file: Option<Overrides>, flags: Overrides) -> Self {
        let mut c = Self::default();
        if let Some(f) = file {
            f.apply(&mut c);
        }
        flags.apply(&mut c);
        c
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.s, self.gamma)
    }

    /// Grid for problem `p`: the profile with any explicit overrides.
    pub fn grid(&self, p: &ProblemParams) -> Result<Grid2D> {
        let (mt, mth) = self.profile.sizes();
        Grid2D::new(
            self.half_width.unwrap_or_else(|| default_half_width(p)),
            self.mt.unwrap_or(mt),
            self.mth.unwrap_or(mth),
        )
    }

    pub fn sl_intervals(&self) -> usize {
        self.m.unwrap_or_else(|| self.profile.sl_intervals())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Overrides::from_ini_str("n = 4\ns = 0.5\n[grid]\nprofile = coarse\n").unwrap();
        let flags = Overrides {
            s: Some(1.0),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(Some(file), flags);
        assert_eq!((c.n, c.s, c.profile), (4, 1.0, Profile::Coarse));
    }

    #[test]
    fn keys_accept_dashes_and_lists() {
        let o = Overrides::from_ini_str("gamma-min = -0.4\ncone = k1+,k2-\nfrom = gamma2").unwrap();
        assert_eq!(o.gamma_min, Some(-0.4));
        assert_eq!(o.cones, Some(vec![Cone::K1Plus, Cone::K2Minus]));
        assert_eq!(o.from, Some(2));
        assert_eq!(parse_cones("all").unwrap().len(), 4);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(Overrides::from_ini_str("colour = blue").is_err());
        assert!(Overrides::from_ini_str("n = three").is_err());
        assert!(parse_from("gamma0").is_err());
    }

    #[test]
    fn grid_overrides() {
        let c = RunConfig {
            profile: Profile::Coarse,
            mth: Some(33),
            ..RunConfig::default()
        };
        let g = c.grid(&c.params().unwrap()).unwrap();
        assert_eq!((g.mt, g.mth), (401, 33));
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
