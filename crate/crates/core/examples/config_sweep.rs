//! Parses a configuration document and writes the sweep as CSV to stdout,
//! the same path the `kerrnet run` command takes.
//!
//! cargo run --release --example config_sweep

use kerrnet::cli::{parse_config, run_sweep, write_csv};

const CONFIG: &str = "\
# a driven Kerr cavity feeding a linear one
[mode]
label = a
kerr = 5
gamma = 1

[mode]
label = b
kerr = 0
gamma = 1

[coupling]
from = a
to = b
g = 0.5
phase = 0

[drive]
target = a
epsilon = 0.01
detuning = 0

[sweep]
variable = detuning
start = -3
stop = 3
points = 13
drive_ports = a, b
";

fn main() -> kerrnet::Result<()> {
    let parsed = parse_config(CONFIG)?;
    for note in &parsed.notes {
        eprintln!("note: {note}");
    }
    let result = run_sweep(&parsed.network, &parsed.sweep, None)?;
    write_csv(&result, &mut std::io::stdout().lock())
}
