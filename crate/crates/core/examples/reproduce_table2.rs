//! Builds the design table from the shipped configuration, exactly as the
//! `qnet table2` command does, without writing files.

use qnet_link::cli::table2;
use qnet_link::config::RunConfig;

fn main() -> qnet_link::Result<()> {
    let cfg = RunConfig::default();
    print!("{}", table2(&cfg)?.render_text());
    Ok(())
}
