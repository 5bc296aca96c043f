use std::net::SocketAddr;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown setting `{0}`")]
    Unknown(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Hard ceiling on the page size any request may ask for.
pub const MAX_PAGE_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub index_path: PathBuf,
    pub retention_days: u32,
    pub default_page_size: usize,
    pub max_page_size: usize,
    pub log_key_path: PathBuf,
    pub log_dir: PathBuf,
    /// Bearer token for `/admin/reload`. Without one, reload is refused.
    pub admin_token: Option<String>,
    /// Allowed browser origin; `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            index_path: PathBuf::from("donut.idx"),
            retention_days: 30,
            default_page_size: 10,
            max_page_size: MAX_PAGE_LIMIT,
            log_key_path: PathBuf::from("log.key"),
            log_dir: PathBuf::from("logs"),
            admin_token: None,
            cors_origin: None,
        }
    }
}

/// Setting names, as used in config files. Environment variables are the
/// upper-cased names with a `DONUT_` prefix.
pub const KEYS: [&str; 9] = [
    "listen",
    "index_path",
    "retention_days",
    "default_page_size",
    "max_page_size",
    "log_key_path",
    "log_dir",
    "admin_token",
    "cors_origin",
];

impl ServiceConfig {
    /// Applies one setting by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let number = |v: &str| v.parse::<usize>().map_err(|_| invalid(key, format!("`{v}` is not a number")));
        match key {
            "listen" => self.listen = value.parse().map_err(|_| invalid(key, format!("`{value}` is not host:port")))?,
            "index_path" => self.index_path = value.into(),
            "retention_days" => {
                self.retention_days = u32::try_from(number(value)?).map_err(|_| invalid(key, "too large"))?;
            }
            "default_page_size" => self.default_page_size = number(value)?,
            "max_page_size" => self.max_page_size = number(value)?,
            "log_key_path" => self.log_key_path = value.into(),
            "log_dir" => self.log_dir = value.into(),
            "admin_token" => self.admin_token = (!value.is_empty()).then(|| value.to_string()),
            "cors_origin" => self.cors_origin = (!value.is_empty() && value != "*").then(|| value.to_string()),
            _ => return Err(ConfigError::Unknown(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.retention_days < 1 {
            return Err(invalid("retention_days", "must be at least 1"));
        }
        if self.max_page_size == 0 || self.max_page_size > MAX_PAGE_LIMIT {
            return Err(invalid("max_page_size", format!("must be in 1..={MAX_PAGE_LIMIT}")));
        }
        if self.default_page_size == 0 || self.default_page_size > self.max_page_size {
            return Err(invalid("default_page_size", "must be in 1..=max_page_size"));
        }
        Ok(())
    }

    /// Defaults overridden by `DONUT_*` variables from `vars`.
    pub fn from_vars<I, K, V>(vars: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut config = ServiceConfig::default();
        config.apply_vars(vars)?;
        Ok(config)
    }

    pub fn apply_vars<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let Some(name) = k.as_ref().strip_prefix("DONUT_") else { continue };
            let name = name.to_ascii_lowercase();
            if KEYS.contains(&name.as_str()) {
                self.set(&name, v.as_ref())?;
            }
        }
        self.validate()
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn from_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = ServiceConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            config.set(k.trim(), v)?;
        }
        config.validate()?;
        Ok(config)
    }
}
