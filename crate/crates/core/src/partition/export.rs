//! Columnar text export of [`LadderTables`].
//!
//! ```text
//! # pinlab-tables v1
//! # law {...json...}
//! # environment {...json...}
//! # params {...json...}
//! # engine pinlab-x.y.z
//! record	N	n	log_value
//! Z		3	-2.1
//! Zf		3	-0.4
//! F	2		-1.7
//! G	2	3	-2.5
//! H	2	3	-2.4
//! ```
//!
//! Empty cells are fields that do not apply; zero weights print as `-inf`.
#![allow(clippy::tabs_in_doc_comments)]

use std::io::Write;

use super::LadderTables;
use crate::error::Result;

pub fn write_tables<W: Write>(tables: &LadderTables, mut out: W) -> Result<()> {
    let prov = tables.provenance();
    writeln!(out, "# pinlab-tables v1")?;
    writeln!(out, "# law {}", serde_json::to_string(&prov.law)?)?;
    writeln!(out, "# environment {}", serde_json::to_string(&prov.environment)?)?;
    writeln!(out, "# params {}", serde_json::to_string(&prov.params)?)?;
    writeln!(out, "# engine {}", prov.engine)?;
    writeln!(out, "record\tN\tn\tlog_value")?;
    for (n, v) in tables.log_z().iter().enumerate() {
        writeln!(out, "Z\t\t{n}\t{v}")?;
    }
    for (n, v) in tables.log_z_free().iter().enumerate() {
        writeln!(out, "Zf\t\t{n}\t{v}")?;
    }
    for (level, v) in tables.log_f_trunc().iter().enumerate() {
        writeln!(out, "F\t{level}\t\t{v}")?;
    }
    for level in 0..=tables.max_jumps() {
        for n in level..=tables.horizon() {
            writeln!(out, "G\t{level}\t{n}\t{}", tables.log_g(level, n))?;
        }
    }
    for level in 0..=tables.max_jumps() {
        for n in level..=tables.horizon() {
            writeln!(out, "H\t{level}\t{n}\t{}", tables.log_at_least(level, n))?;
        }
    }
    Ok(())
}
