//! Fill common IAB ad-slot sizes with study widgets.
//!
//!     cargo run --example ad_slot_layout

use edvert::placement::{default_units, fit_slot, SlotFill};

pub fn run() -> Vec<((u32, u32), Option<SlotFill>)> {
    let units = default_units();
    let slots = [(728, 90), (300, 250), (336, 280), (160, 600), (300, 600), (970, 250), (320, 50), (120, 60)];
    let mut out = Vec::new();
    for (w, h) in slots {
        let fill = fit_slot(w, h, &units).expect("positive sizes");
        match &fill {
            Some(f) => println!("{w:>4}x{h:<4} -> {f}  (covers {:.0}%)", 100.0 * f.covered_area() / f64::from(w * h)),
            None => println!("{w:>4}x{h:<4} -> no fit"),
        }
        out.push(((w, h), fill));
    }
    out
}

#[allow(dead_code)]
fn main() {
    run();
}
