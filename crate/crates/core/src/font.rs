//! Tiny built-in 5x7 bitmap font plus rect/text drawing used by the view
//! annotator. Metrics are fixed (7 px advance, 12 px line height, 2 px
//! padding) so label sizes never depend on a system font stack.

use crate::render::Image;

/// Horizontal advance per character, in pixels.
pub const CHAR_ADVANCE: u32 = 7;
/// Line height, in pixels.
pub const LINE_HEIGHT: u32 = 12;
/// Padding around the text block inside a label, in pixels.
pub const PADDING: u32 = 2;

const GLYPH_W: i64 = 5;
const GLYPH_H: i64 = 7;

/// Size in pixels of the label rectangle for `text`.
pub fn label_size(text: &str) -> (u32, u32) {
    let chars = text.chars().count() as u32;
    (chars * CHAR_ADVANCE + 2 * PADDING, LINE_HEIGHT + 2 * PADDING)
}

/// Rows are top-to-bottom; bit 4 is the leftmost pixel.
fn glyph(c: char) -> [u8; 7] {
    match c {
        '0' => [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
        '1' => [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        '2' => [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111],
        '3' => [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
        '4' => [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
        '5' => [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
        '6' => [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
        '7' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
        '8' => [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
        '9' => [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
        'a' => [0b00000, 0b00000, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111],
        'b' => [0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b11110],
        'c' => [0b00000, 0b00000, 0b01110, 0b10000, 0b10000, 0b10001, 0b01110],
        'd' => [0b00001, 0b00001, 0b01101, 0b10011, 0b10001, 0b10001, 0b01111],
        'e' => [0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110],
        'f' => [0b00110, 0b01001, 0b01000, 0b11100, 0b01000, 0b01000, 0b01000],
        'g' => [0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110],
        'h' => [0b10000, 0b10000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001],
        'i' => [0b00100, 0b00000, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110],
        'j' => [0b00010, 0b00000, 0b00110, 0b00010, 0b00010, 0b10010, 0b01100],
        'k' => [0b10000, 0b10000, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010],
        'l' => [0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        'm' => [0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10101, 0b10101],
        'n' => [0b00000, 0b00000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001],
        'o' => [0b00000, 0b00000, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110],
        'p' => [0b00000, 0b00000, 0b11110, 0b10001, 0b11110, 0b10000, 0b10000],
        'q' => [0b00000, 0b00000, 0b01101, 0b10011, 0b01111, 0b00001, 0b00001],
        'r' => [0b00000, 0b00000, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000],
        's' => [0b00000, 0b00000, 0b01110, 0b10000, 0b01110, 0b00001, 0b11110],
        't' => [0b01000, 0b01000, 0b11100, 0b01000, 0b01000, 0b01001, 0b00110],
        'u' => [0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101],
        'v' => [0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100],
        'w' => [0b00000, 0b00000, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010],
        'x' => [0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001],
        'y' => [0b00000, 0b00000, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110],
        'z' => [0b00000, 0b00000, 0b11111, 0b00010, 0b00100, 0b01000, 0b11111],
        ':' => [0b00000, 0b00100, 0b00100, 0b00000, 0b00100, 0b00100, 0b00000],
        '_' => [0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b11111],
        '-' => [0b00000, 0b00000, 0b00000, 0b01110, 0b00000, 0b00000, 0b00000],
        '.' => [0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00100, 0b00100],
        ' ' => [0; 7],
        // Unknown characters render as a filled block.
        _ => [0b11111; 7],
    }
}

/// Fills an axis-aligned rectangle given in inclusive pixel coordinates,
/// clipped to the image.
pub fn fill_rect(img: &mut Image, x_min: i64, y_min: i64, x_max: i64, y_max: i64, color: [u8; 3]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for y in y_min.max(0)..=y_max.min(h - 1) {
        for x in x_min.max(0)..=x_max.min(w - 1) {
            img.set(x as u32, y as u32, color);
        }
    }
    // Degenerate (inverted) rects draw nothing, which the loop bounds handle.
}

/// Draws a rectangle outline of the given thickness, growing inward from the
/// inclusive bounds, clipped to the image.
pub fn draw_rect_outline(
    img: &mut Image,
    x_min: i64,
    y_min: i64,
    x_max: i64,
    y_max: i64,
    thickness: i64,
    color: [u8; 3],
) {
    let t = thickness - 1;
    fill_rect(img, x_min, y_min, x_max, y_min + t, color); // top
    fill_rect(img, x_min, y_max - t, x_max, y_max, color); // bottom
    fill_rect(img, x_min, y_min, x_min + t, y_max, color); // left
    fill_rect(img, x_max - t, y_min, x_max, y_max, color); // right
}

/// Draws `text` with the bitmap font, top-left of the text block at (x, y).
pub fn draw_text(img: &mut Image, x: i64, y: i64, text: &str, color: [u8; 3]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let v_off = (LINE_HEIGHT as i64 - GLYPH_H) / 2;
    for (i, c) in text.chars().enumerate() {
        let gx = x + i as i64 * CHAR_ADVANCE as i64 + 1;
        let gy = y + v_off;
        let rows = glyph(c);
        for (ry, row) in rows.iter().enumerate() {
            for rx in 0..GLYPH_W {
                if row >> (GLYPH_W - 1 - rx) & 1 == 1 {
                    let px = gx + rx;
                    let py = gy + ry as i64;
                    if px >= 0 && px < w && py >= 0 && py < h {
                        img.set(px as u32, py as u32, color);
                    }
                }
            }
        }
    }
}
