//! Minimum-area rotated rectangles and rotated-box overlap.

use uft::{mbr_of_mask, polygon_overlap, BinaryMask, RotBox};

fn main() -> uft::Result<()> {
    // A diagonal bar: its tightest rectangle is rotated by 45 degrees.
    let bar = BinaryMask::from_fn(40, 40, |r, c| {
        let (x, y) = (c as f64 - 20.0, r as f64 - 20.0);
        (x - y).abs() <= 2.0 && (x + y).abs() <= 24.0
    });
    let mbr = mbr_of_mask(&bar)?;
    let (w, h) = mbr.size();
    println!(
        "bar: {} pixels, MBR {w:.2} x {h:.2} at {:.1} deg, area {:.1}",
        bar.count(),
        mbr.angle().to_degrees(),
        mbr.area()
    );
    let alb = mbr.bounding_box();
    println!("axis-aligned bounds area {:.1}", alb.area());

    let square = RotBox::from_center(0.0, 0.0, 2.0, 2.0, 0.0)?;
    for deg in [0.0, 15.0, 30.0, 45.0] {
        let turned = RotBox::from_center(0.0, 0.0, 2.0, 2.0, f64::to_radians(deg))?;
        println!(
            "square vs itself rotated {deg:>4}: IoU {:.5}",
            polygon_overlap(&square, &turned)?
        );
    }
    let shifted = RotBox::from_center(1.0, 0.0, 2.0, 2.0, 0.0)?;
    println!(
        "half-shifted square: IoU {:.5}",
        polygon_overlap(&square, &shifted)?
    );
    Ok(())
}
