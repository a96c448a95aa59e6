//! Binary PGM encoding, decoding and error reporting.

use boostdet::app::pgm::{encode_pgm, parse_pgm};
use boostdet::GrayImage;

fn main() {
    let img = GrayImage::from_fn(4, 3, |x, y| (x * 60 + y * 5) as u8).unwrap();
    let bytes = encode_pgm(&img);
    println!("{} bytes, header {:?}", bytes.len(), String::from_utf8_lossy(&bytes[..11]));
    assert_eq!(parse_pgm(&bytes).unwrap(), img);
    for bad in [&b"P2\n2 2\n255\n0 0 0 0\n"[..], b"P5\n2 2\n255\n\x01\x02", b"P5\n2 2\n65535\n"] {
        println!("{}", parse_pgm(bad).unwrap_err());
    }
}
