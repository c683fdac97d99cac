//! CSV tables and companion gnuplot scripts.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::experiments::{Checkpoint, EnergyRow, ProjectionRow, ResultRow};

pub const RESULT_HEADER: &str = "method,h,k,err_v_inf2,err_phi_inf2,err_v_22,err_phi_22,order,wall_time_s";
pub const ENERGY_HEADER: &str = "method,k,t,energy,rel_drift";
pub const PROJECTION_HEADER: &str = "h,err_v,err_phi,commutation,order_v,order_phi";

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULT_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{:.3}",
            r.method.name(),
            num(r.h),
            num(r.k),
            num(r.err_v_inf2),
            num(r.err_phi_inf2),
            num(r.err_v_22),
            num(r.err_phi_22),
            opt(r.order),
            r.wall_time_s,
        );
    }
    s
}

pub fn energy_csv(rows: &[EnergyRow]) -> String {
    let mut s = String::from(ENERGY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.method.name(), num(r.k), num(r.t), num(r.energy), num(r.rel_drift));
    }
    s
}

pub fn projection_csv(rows: &[ProjectionRow]) -> String {
    let mut s = String::from(PROJECTION_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(r.h),
            num(r.err_v),
            num(r.err_phi),
            num(r.commutation),
            opt(r.order_v),
            opt(r.order_phi)
        );
    }
    s
}

/// `index,value` lines of a stored state: velocity block first.
pub fn checkpoint_csv(c: &Checkpoint) -> String {
    let mut s = String::from("field,index,value\n");
    for (i, v) in c.state.v.iter().enumerate() {
        let _ = writeln!(s, "v,{i},{}", num(*v));
    }
    for (i, v) in c.state.phi.iter().enumerate() {
        let _ = writeln!(s, "phi,{i},{}", num(*v));
    }
    s
}

fn sibling(csv: &Path, extension: &str) -> PathBuf {
    csv.with_extension(extension)
}

fn quote(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Log-log error plot of a convergence table.
pub fn convergence_plot(csv: &Path) -> String {
    let data = quote(csv);
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale xy\n\
         set xlabel 'h'\n\
         set ylabel 'error'\n\
         set terminal pngcairo size 1200,500\n\
         set output '{stem}.png'\n\
         set multiplot layout 1,2\n\
         set title 'sup-in-time L2 errors'\n\
         plot for [m in \"qi galerkin\"] '{data}' using (strcol(1) eq m ? $2 : NaN):4 with linespoints title m.' v', \\\n\
         \x20    for [m in \"qi galerkin\"] '{data}' using (strcol(1) eq m ? $2 : NaN):5 with linespoints title m.' phi'\n\
         set title 'L2-in-time errors'\n\
         plot for [m in \"qi galerkin\"] '{data}' using (strcol(1) eq m ? $2 : NaN):6 with linespoints title m.' v', \\\n\
         \x20    for [m in \"qi galerkin\"] '{data}' using (strcol(1) eq m ? $2 : NaN):7 with linespoints title m.' phi'\n\
         unset multiplot\n"
    )
}

/// Relative energy drift against time.
pub fn energy_plot(csv: &Path) -> String {
    let data = quote(csv);
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set xlabel 't'\n\
         set ylabel '|E(t) - E(0)| / E(0)'\n\
         set terminal pngcairo size 800,500\n\
         set output '{stem}.png'\n\
         plot '{data}' using 3:($5 > 0 ? $5 : 1e-17) with lines title 'relative drift'\n"
    )
}

pub fn projection_plot(csv: &Path) -> String {
    let data = quote(csv);
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale xy\n\
         set xlabel 'h'\n\
         set terminal pngcairo size 800,500\n\
         set output '{stem}.png'\n\
         plot '{data}' using 1:2 with linespoints, '{data}' using 1:3 with linespoints, '{data}' using 1:4 with linespoints\n"
    )
}

/// Writes `text` to `path` and the plot script next to it with a `.gp` extension.
pub fn write_with_plot(path: &Path, text: &str, plot: impl Fn(&Path) -> String) -> io::Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    let script = sibling(path, "gp");
    std::fs::write(&script, plot(path))?;
    Ok(script)
}
