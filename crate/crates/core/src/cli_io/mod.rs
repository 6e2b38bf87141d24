//! Config ingestion, experiment orchestration and result persistence.

mod config;
mod record;
mod run;

pub use config::{
    parse_config, GridConfig, MollifierConfig, PropagationConfig, RangeConfig, ScenarioConfig, SweepConfig,
    TimesConfig, TolerancesConfig, ValidatedConfig, WindowConfig, DEFAULT_MOLLIFIER_CELLS,
};
pub use record::{
    config_hash, emit, parse_rows_csv, record_json, rows_csv, write_atomic, Manifest, ManifestEntry, OutputFormat,
    ResultRecord, SpectrumBlock, SweepRow, SweepSummary, Timing, CSV_HEADER, VERSION,
};
pub use run::{run_propagate, run_spectrum, run_sweep};

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "WEYL_LAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "results";

/// Exit status of a sweep whose target norm was not reached in range.
pub const EXIT_NOT_ACHIEVED: i32 = 3;

/// `--out`, else the environment variable, else the default directory.
pub fn resolve_out_dir(flag: Option<&std::path::Path>, env: Option<std::ffi::OsString>) -> std::path::PathBuf {
    match (flag, env) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => e.into(),
        _ => DEFAULT_OUT_DIR.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn out_dir_precedence() {
        assert_eq!(resolve_out_dir(Some(Path::new("a")), Some("b".into())), Path::new("a"));
        assert_eq!(resolve_out_dir(None, Some("b".into())), Path::new("b"));
        assert_eq!(resolve_out_dir(None, None), Path::new(DEFAULT_OUT_DIR));
    }

    fn small(text: &str) -> ValidatedConfig {
        ScenarioConfig::from_toml_str(text).unwrap().validate().unwrap()
    }

    #[test]
    fn constant_spectrum_run() {
        let v = small("scenario = \"constant\"\n[grid]\nN = 41\nL = 20.0\n");
        let r = run_spectrum(&v).unwrap();
        let s = r.spectrum.unwrap();
        assert!(s.one_sided_hausdorff <= 1e-9);
        assert_eq!(s.predicted.intervals().len(), 1);
        assert!(r.rows.is_empty());
    }

    #[test]
    fn elliptic_spectrum_is_clipped_and_noted() {
        let v = small("scenario = \"step\"\n[grid]\nN = 41\nL = 20.0\n");
        let s = run_spectrum(&v).unwrap().spectrum.unwrap();
        assert!(s.clipped && !s.notes.is_empty());
    }

    #[test]
    fn sweep_requires_its_blocks() {
        let v = small("scenario = \"step\"\n[grid]\nN = 41\nL = 20.0\n");
        assert!(matches!(run_sweep(&v), Err(crate::Error::Validation(_))));
    }

    #[test]
    fn small_sweep_is_deterministic() {
        let text = "scenario = \"step\"\nseed = 5\n[grid]\nN = 61\nL = 30.0\n[energy_window]\nalpha = 0.3\nbeta = 0.7\n[sweep]\ncomponent = \"x_plus\"\noffsets = [0.0, 3.0, 6.0]\n[propagation]\nrandom_states = 5\n[times]\ncount = 5\n";
        let v = small(text);
        let a = run_sweep(&v).unwrap();
        let b = run_sweep(&v).unwrap();
        assert_eq!(rows_csv(&a.rows).unwrap(), rows_csv(&b.rows).unwrap());
        assert_eq!(a.rows.len(), 3);
        let s = a.sweep.unwrap();
        assert_eq!(s.propagation_holds, Some(true));
        assert_eq!(s.seminorm_decay.len(), 3);
        assert!(a
            .rows
            .iter()
            .all(|r| r.dynamical_sup.unwrap() <= r.localization_norm + 1e-6));
    }
}
