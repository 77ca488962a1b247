//! CSV export of nodal snapshots: `t,x,u,v,patch_type`.
//!
//! `v` is the physical density. At interface nodes it is double-valued; the
//! type-1 side value (which equals `u`) is written and `patch_type` is 0.

use std::io::{self, Write};

use crate::landscape::{Landscape, NodeDensity};

use super::stepper::Field;

pub const SNAPSHOT_HEADER: &str = "t,x,u,v,patch_type";

pub fn write_snapshot_rows(out: &mut impl Write, field: &Field, landscape: &Landscape) -> io::Result<()> {
    for (i, dens) in field.physical(landscape).into_iter().enumerate() {
        let u = field.values[i];
        let v = match dens {
            None => u,
            Some(NodeDensity::Patch { v, .. }) => v,
            Some(NodeDensity::Interface { .. }) => u,
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            field.time,
            field.grid.x[i],
            u,
            v,
            field.grid.kinds[i].patch_code()
        )?;
    }
    Ok(())
}

pub fn write_snapshots<'a>(
    out: &mut impl Write,
    fields: impl IntoIterator<Item = &'a Field>,
    landscape: &Landscape,
) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for f in fields {
        write_snapshot_rows(out, f, landscape)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::Grid;
    use std::sync::Arc;

    #[test]
    fn header_and_conversion() {
        let ls = Landscape::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let g = Arc::new(Grid::truncated(&ls, 1, 4).unwrap());
        let f = Field::from_fn(g.clone(), |_| 2.0).unwrap();
        let mut buf = Vec::new();
        write_snapshots(&mut buf, [&f], &ls).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SNAPSHOT_HEADER));
        // Second node is inside the leftmost type-2 patch: v = u / k = 1.
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(row[3], "1");
        assert_eq!(row[4], "2");
        assert_eq!(text.lines().count(), g.len() + 1);
    }
}
