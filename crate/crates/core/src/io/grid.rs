use std::fmt::Write as _;
use std::path::Path;

use super::table::parse_table;
use crate::error::Result;
use crate::fitting::{GridRecord, MeasurementGrid};
use crate::numeric::format_f64;

pub const GRID_COLUMNS: [&str; 6] = [
    "power_mw",
    "rabi_mhz",
    "width_mhz",
    "width_sigma",
    "amplitude",
    "amplitude_sigma",
];

pub fn grid_to_text(grid: &MeasurementGrid) -> String {
    let mut s = String::from("# odmr measurement grid\n");
    s.push_str(&GRID_COLUMNS.join(" "));
    s.push('\n');
    for r in &grid.records {
        let vals = [
            r.power_mw,
            r.rabi_hz,
            r.width_hz,
            r.width_sigma,
            r.amplitude,
            r.amplitude_sigma,
        ];
        let line: Vec<String> = vals.iter().map(|v| format_f64(*v)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn grid_from_text(text: &str) -> Result<MeasurementGrid> {
    let t = parse_table(text)?;
    let cols: Vec<Vec<f64>> = GRID_COLUMNS.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    let records = (0..t.rows.len())
        .map(|i| GridRecord {
            power_mw: cols[0][i],
            rabi_hz: cols[1][i],
            width_hz: cols[2][i],
            width_sigma: cols[3][i],
            amplitude: cols[4][i],
            amplitude_sigma: cols[5][i],
        })
        .collect();
    let grid = MeasurementGrid::new(records);
    grid.validate()?;
    Ok(grid)
}

pub fn write_grid(path: &Path, grid: &MeasurementGrid) -> Result<()> {
    grid.validate()?;
    std::fs::write(path, grid_to_text(grid))?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<MeasurementGrid> {
    grid_from_text(&std::fs::read_to_string(path)?)
}
