//! Rectangle sums and window statistics in constant time.

use boostdet::imaging::{build_integral, rect_sum, window_stats};
use boostdet::{GrayImage, Rect};

fn main() {
    let img = GrayImage::from_fn(8, 6, |x, y| (x * 10 + y) as u8).unwrap();
    let ii = build_integral(&img);
    let r = Rect::new(2, 1, 3, 4);
    println!("sum over {r} = {}", rect_sum(&ii, &r).unwrap());
    let stats = window_stats(&ii, &img.full_rect()).unwrap();
    println!("whole image: mean {:.2}, std dev {:.2}", stats.mean, stats.std_dev);
}
