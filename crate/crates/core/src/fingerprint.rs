//! Content fingerprints recorded in reports so results can be traced back
//! to their inputs.

use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::label::LabelStats;

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Fingerprint of a label-count table: SHA-256 over `label\tcount\n` lines
/// in label order.
pub fn stats_fingerprint(stats: &LabelStats) -> String {
    let mut hasher = Sha256::new();
    let mut line = String::new();
    for (label, count) in stats.iter() {
        line.clear();
        let _ = writeln!(line, "{label}\t{count}");
        hasher.update(line.as_bytes());
    }
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn stats_fingerprint_depends_on_counts() {
        let a = LabelStats::from_counts([("person", 2), ("place", 1)]).unwrap();
        let b = LabelStats::from_counts([("place", 1), ("person", 2)]).unwrap();
        let c = LabelStats::from_counts([("person", 3), ("place", 1)]).unwrap();
        assert_eq!(stats_fingerprint(&a), stats_fingerprint(&b));
        assert_ne!(stats_fingerprint(&a), stats_fingerprint(&c));
        assert_eq!(stats_fingerprint(&a), sha256_hex(b"person\t2\nplace\t1\n"));
    }
}
