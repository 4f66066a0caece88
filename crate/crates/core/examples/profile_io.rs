//! Writes a radial profile to CSV with its header and reads it back.

use std::sync::Arc;

use cma_lab::domain::io::{read_profile, write_profile_csv, write_profile_header};
use cma_lab::domain::radial::{RadialBall, RadialProfile};

fn main() -> cma_lab::Result<()> {
    let u = RadialProfile::from_fn(Arc::new(RadialBall::uniform(2, 1.0, 8)?), |r| r * r - 1.0)?;
    let (mut csv, mut header) = (Vec::new(), Vec::new());
    write_profile_csv(&u, &mut csv)?;
    write_profile_header(&u, &mut header)?;
    print!("{}", String::from_utf8_lossy(&csv));
    println!("{}", String::from_utf8_lossy(&header));
    let back = read_profile(csv.as_slice(), header.as_slice())?;
    println!("round trip exact: {}", back.values() == u.values());
    Ok(())
}
