//! Shared 8-connected component labeling over a boolean raster.

/// A connected component of set pixels: linear indices into the raster,
/// in ascending order.
#[derive(Debug, Clone)]
pub(crate) struct Component {
    pub pixels: Vec<usize>,
}

/// Finds 8-connected components of set bits, in raster scan order of each
/// component's first pixel.
pub(crate) fn components_8(width: usize, height: usize, bits: &[bool]) -> Vec<Component> {
    assert_eq!(bits.len(), width * height);
    let mut visited = vec![false; bits.len()];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || visited[start] {
            continue;
        }
        let mut pixels = Vec::new();
        visited[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            pixels.push(idx);
            let x = idx % width;
            let y = idx / width;
            let x_lo = x.saturating_sub(1);
            let x_hi = (x + 1).min(width - 1);
            let y_lo = y.saturating_sub(1);
            let y_hi = (y + 1).min(height - 1);
            for ny in y_lo..=y_hi {
                for nx in x_lo..=x_hi {
                    let nidx = ny * width + nx;
                    if bits[nidx] && !visited[nidx] {
                        visited[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        pixels.sort_unstable();
        components.push(Component { pixels });
    }
    components
}
