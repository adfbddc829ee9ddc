//! Pipeline configuration: defaults, config file, and flag overrides.
//!
//! Precedence is defaults < config file < command-line flags, per field.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Which vision-chat backend a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendConfig {
    Mock {
        script: PathBuf,
    },
    Http {
        endpoint: String,
        model: String,
        #[serde(default = "default_timeout_s")]
        timeout_s: u64,
    },
}

fn default_timeout_s() -> u64 {
    120
}

/// Input and output locations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paths {
    pub cloud: Option<PathBuf>,
    pub proposals: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    /// Output directory; every command reads and writes artifacts here.
    pub output: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub views: u32,
    pub fov_deg: f64,
    pub image_size: u32,
    pub splat_radius_px: u32,
    pub workers: u32,
    pub zoom_step1: bool,
    pub backend: Option<BackendConfig>,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            views: 8,
            fov_deg: 90.0,
            image_size: 680,
            splat_radius_px: 2,
            workers: 1,
            zoom_step1: false,
            backend: None,
            paths: Paths::default(),
        }
    }
}

/// On-disk config file; every field optional so it overlays the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub views: Option<u32>,
    pub fov_deg: Option<f64>,
    pub image_size: Option<u32>,
    pub splat_radius_px: Option<u32>,
    pub workers: Option<u32>,
    pub zoom_step1: Option<bool>,
    pub backend: Option<BackendConfig>,
    pub paths: Option<Paths>,
}

/// Command-line overrides; `None` means the flag was not given.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigFlags {
    /// JSON config file to start from.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Number of surround views.
    #[arg(long)]
    pub views: Option<u32>,

    /// Horizontal field of view in degrees.
    #[arg(long)]
    pub fov_deg: Option<f64>,

    /// Square output image size in pixels.
    #[arg(long)]
    pub image_size: Option<u32>,

    /// Point splat radius in pixels.
    #[arg(long)]
    pub splat_radius: Option<u32>,

    /// Concurrent task workers for `run` (1 keeps traces reproducible).
    #[arg(long)]
    pub workers: Option<u32>,

    /// Second step-1 round with a 2x center crop of the chosen view.
    #[arg(long)]
    pub zoom: bool,

    /// Scripted mock backend: JSON array of reply strings.
    #[arg(long, conflicts_with_all = ["http_endpoint", "http_model"])]
    pub mock_script: Option<PathBuf>,

    /// Chat-completions endpoint URL.
    #[arg(long, requires = "http_model")]
    pub http_endpoint: Option<String>,

    /// Model name sent to the HTTP backend.
    #[arg(long)]
    pub http_model: Option<String>,

    /// HTTP timeout in seconds.
    #[arg(long)]
    pub http_timeout_s: Option<u64>,

    /// Scene point cloud (PLY).
    #[arg(long)]
    pub cloud: Option<PathBuf>,

    /// Element proposals (JSON).
    #[arg(long)]
    pub proposals: Option<PathBuf>,

    /// Task instructions (JSON-lines).
    #[arg(long)]
    pub tasks: Option<PathBuf>,

    /// Ground-truth triplets (JSON-lines).
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,

    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl PipelineConfig {
    /// Resolves defaults, then the config file (if given), then flags.
    pub fn resolve(flags: &ConfigFlags) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply_file(&load_config_file(path)?);
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: &ConfigFile) {
        if let Some(v) = file.views {
            self.views = v;
        }
        if let Some(v) = file.fov_deg {
            self.fov_deg = v;
        }
        if let Some(v) = file.image_size {
            self.image_size = v;
        }
        if let Some(v) = file.splat_radius_px {
            self.splat_radius_px = v;
        }
        if let Some(v) = file.workers {
            self.workers = v;
        }
        if let Some(v) = file.zoom_step1 {
            self.zoom_step1 = v;
        }
        if let Some(v) = &file.backend {
            self.backend = Some(v.clone());
        }
        if let Some(p) = &file.paths {
            merge_path(&mut self.paths.cloud, &p.cloud);
            merge_path(&mut self.paths.proposals, &p.proposals);
            merge_path(&mut self.paths.tasks, &p.tasks);
            merge_path(&mut self.paths.ground_truth, &p.ground_truth);
            merge_path(&mut self.paths.output, &p.output);
        }
    }

    fn apply_flags(&mut self, flags: &ConfigFlags) -> Result<()> {
        if let Some(v) = flags.views {
            self.views = v;
        }
        if let Some(v) = flags.fov_deg {
            self.fov_deg = v;
        }
        if let Some(v) = flags.image_size {
            self.image_size = v;
        }
        if let Some(v) = flags.splat_radius {
            self.splat_radius_px = v;
        }
        if let Some(v) = flags.workers {
            self.workers = v;
        }
        if flags.zoom {
            self.zoom_step1 = true;
        }
        match (&flags.mock_script, &flags.http_endpoint) {
            (Some(script), None) => {
                self.backend = Some(BackendConfig::Mock {
                    script: script.clone(),
                });
            }
            (None, Some(endpoint)) => {
                let model = flags
                    .http_model
                    .clone()
                    .context("--http-endpoint needs --http-model")?;
                self.backend = Some(BackendConfig::Http {
                    endpoint: endpoint.clone(),
                    model,
                    timeout_s: flags.http_timeout_s.unwrap_or(default_timeout_s()),
                });
            }
            (Some(_), Some(_)) => bail!("--mock-script and --http-endpoint are exclusive"),
            (None, None) => {}
        }
        merge_path(&mut self.paths.cloud, &flags.cloud);
        merge_path(&mut self.paths.proposals, &flags.proposals);
        merge_path(&mut self.paths.tasks, &flags.tasks);
        merge_path(&mut self.paths.ground_truth, &flags.ground_truth);
        merge_path(&mut self.paths.output, &flags.output);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.views < 1 {
            bail!("views must be >= 1, got {}", self.views);
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            bail!("fov_deg must be in (0, 180), got {}", self.fov_deg);
        }
        if self.image_size < 64 {
            bail!("image_size must be >= 64, got {}", self.image_size);
        }
        if self.workers < 1 {
            bail!("workers must be >= 1, got {}", self.workers);
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.paths.output.clone().unwrap_or_else(|| "out".into())
    }

    pub fn require_cloud(&self) -> Result<&Path> {
        self.paths
            .cloud
            .as_deref()
            .context("no point cloud given (set --cloud or paths.cloud)")
    }

    pub fn require_tasks(&self) -> Result<&Path> {
        self.paths
            .tasks
            .as_deref()
            .context("no tasks file given (set --tasks or paths.tasks)")
    }

    pub fn require_ground_truth(&self) -> Result<&Path> {
        self.paths
            .ground_truth
            .as_deref()
            .context("no ground-truth file given (set --ground-truth or paths.ground_truth)")
    }

    pub fn require_backend(&self) -> Result<&BackendConfig> {
        self.backend
            .as_ref()
            .context("no backend configured (set --mock-script, --http-endpoint, or backend in the config file)")
    }
}

fn merge_path(dst: &mut Option<PathBuf>, src: &Option<PathBuf>) {
    if let Some(p) = src {
        *dst = Some(p.clone());
    }
}

fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("config file {} is not valid JSON", path.display()))
}
