//! Emission: fixed-header CSV time series, suppression and filter CSVs,
//! SHA-256 config hashing, and atomic file writes (temp then rename) so a
//! crash never leaves a half-written artifact. All numeric text is printed
//! with 12 significant digits, which makes re-runs byte-identical.

use std::fs;
use std::path::Path;

use duobath_core::observables::{ObservableSeries, SuppressionSeries};
use duobath_core::schedule::{detuning_at, Schedule};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Header of every time-series CSV, bit-exact.
pub const TIMESERIES_HEADER: &str = "t,n1,n2,re_coh,im_coh,abs_A1_sq,abs_A2_sq,detuning";

/// Header of the filter-function CSV.
pub const FILTER_HEADER: &str = "omega,F";

/// Header of the suppression CSV emitted next to a controlled run.
pub const SUPPRESSION_HEADER: &str = "t,S";

/// 12 significant digits in scientific decimal notation.
pub fn format_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Write `bytes` to `path` atomically: the content lands under a temporary
/// sibling name and is renamed into place, so concurrent readers see either
/// the old file or the complete new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

/// The main time-series CSV: one row per grid point, detuning column taken
/// from the schedule that produced the run.
pub fn timeseries_csv(obs: &ObservableSeries, schedule: &Schedule) -> CliResult<String> {
    let mut out = String::with_capacity(obs.times.len() * 96 + 64);
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for i in 0..obs.times.len() {
        let t = obs.times[i];
        let d = detuning_at(schedule, t)?;
        out.push_str(&format_sig(t));
        out.push(',');
        out.push_str(&format_sig(obs.n1[i]));
        out.push(',');
        out.push_str(&format_sig(obs.n2[i]));
        out.push(',');
        out.push_str(&format_sig(obs.coherence[i].re));
        out.push(',');
        out.push_str(&format_sig(obs.coherence[i].im));
        out.push(',');
        out.push_str(&format_sig(obs.abs_a1_sq[i]));
        out.push(',');
        out.push_str(&format_sig(obs.abs_a2_sq[i]));
        out.push(',');
        out.push_str(&format_sig(d));
        out.push('\n');
    }
    Ok(out)
}

/// Suppression CSV; entries the score skipped are printed as `NaN`.
pub fn suppression_csv(s: &SuppressionSeries) -> String {
    let mut out = String::with_capacity(s.times.len() * 32 + 8);
    out.push_str(SUPPRESSION_HEADER);
    out.push('\n');
    for i in 0..s.times.len() {
        out.push_str(&format_sig(s.times[i]));
        out.push(',');
        out.push_str(&format_sig(s.values[i]));
        out.push('\n');
    }
    out
}

/// Filter-function CSV over a frequency grid.
pub fn filter_csv(omegas: &[f64], values: &[f64]) -> String {
    let mut out = String::with_capacity(omegas.len() * 32 + 8);
    out.push_str(FILTER_HEADER);
    out.push('\n');
    for (w, f) in omegas.iter().zip(values) {
        out.push_str(&format_sig(*w));
        out.push(',');
        out.push_str(&format_sig(*f));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting_is_stable() {
        assert_eq!(format_sig(1.0), "1.00000000000e0");
        assert_eq!(format_sig(0.5822), "5.82200000000e-1");
        assert_eq!(format_sig(-3.25e-12), "-3.25000000000e-12");
        assert_eq!(format_sig(0.0), "0.00000000000e0");
        assert_eq!(format_sig(f64::NAN), "NaN");
    }

    #[test]
    fn hashing_matches_a_known_vector() {
        // SHA-256 of the empty string and of "abc" are fixed constants
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_writes_replace_content_and_leave_no_temp() {
        let dir = std::env::temp_dir().join(format!("duobath-out-test-{}", std::process::id()));
        let path = dir.join("nested").join("file.csv");
        write_atomic(&path, b"first").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"first");
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        let entries: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries.len(), 1, "temp files left behind: {entries:?}");
        fs::remove_dir_all(&dir).unwrap();
    }
}
