use std::io::{self, Write};

use super::PackingLp;

/// Writes the packing LP in CPLEX LP text format. Variables are `q0 … q{n−1}`,
/// rows are `e0 … e{m−1}` in incidence order.
pub fn write_lp_format(lp: &PackingLp, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "\\ fractional vertex packing")?;
    writeln!(out, "Maximize")?;
    write!(out, " obj:")?;
    let mut any = false;
    for (v, &p) in lp.masses().iter().enumerate() {
        if p != 0.0 {
            write!(out, " {}{p} q{v}", if any { "+ " } else { "" })?;
            any = true;
        }
    }
    if !any {
        write!(out, " 0 q0")?;
    }
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for (e, row) in lp.incidence().rows().iter().enumerate() {
        let terms: Vec<String> = row.iter().map(|v| format!("q{v}")).collect();
        writeln!(out, " e{e}: {} <= 1", terms.join(" + "))?;
    }
    writeln!(out, "Bounds")?;
    for v in 0..lp.num_vertices() {
        writeln!(out, " 0 <= q{v} <= 1")?;
    }
    writeln!(out, "End")
}
