use super::IngestError;

/// Binarized page image; `bitmap[y * width + x]` is 1 for ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRaster {
    pub width: usize,
    pub height: usize,
    pub bitmap: Vec<u8>,
}

impl PageRaster {
    pub fn blank(width: usize, height: usize) -> PageRaster {
        PageRaster { width, height, bitmap: vec![0; width * height] }
    }

    pub fn new(width: usize, height: usize, bitmap: Vec<u8>) -> Result<PageRaster, IngestError> {
        if bitmap.len() != width * height {
            return Err(IngestError::Raster(format!("{width}x{height} raster needs {} pixels, got {}", width * height, bitmap.len())));
        }
        if bitmap.iter().any(|&p| p > 1) {
            return Err(IngestError::Raster("bitmap values must be 0 or 1".into()));
        }
        Ok(PageRaster { width, height, bitmap })
    }

    pub fn ink(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.bitmap[y * self.width + x] == 1
    }

    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        if x < self.width && y < self.height {
            self.bitmap[y * self.width + x] = u8::from(ink);
        }
    }

    /// Sets every pixel of `[x0, x1) x [y0, y1)`, clipped to the page.
    pub fn fill(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, ink: bool) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.bitmap[y * self.width + x] = u8::from(ink);
            }
        }
    }

    pub fn ink_count(&self) -> usize {
        self.bitmap.iter().filter(|&&p| p == 1).count()
    }

    /// Binary PGM (P5, maxval 255); ink is black.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.bitmap.iter().map(|&p| if p == 1 { 0u8 } else { 255u8 }));
        out
    }

    /// Reads P5 (binary) or P2 (ASCII) graymaps; pixels darker than half of
    /// maxval are ink.
    pub fn from_pgm(data: &[u8]) -> Result<PageRaster, IngestError> {
        let bad = |m: &str| IngestError::Pgm(m.to_string());
        let mut pos = 0;
        let mut header = Vec::new();
        while header.len() < 4 {
            while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
                if data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            header.push(std::str::from_utf8(&data[start..pos]).map_err(|_| bad("header is not ASCII"))?.to_string());
        }
        let magic = header[0].as_str();
        let width: usize = header[1].parse().map_err(|_| bad("bad width"))?;
        let height: usize = header[2].parse().map_err(|_| bad("bad height"))?;
        let maxval: u32 = header[3].parse().map_err(|_| bad("bad maxval"))?;
        if maxval == 0 || maxval > 255 {
            return Err(bad("only 8-bit graymaps are supported"));
        }
        let threshold = maxval.div_ceil(2);
        let pixels: Vec<u32> = match magic {
            "P5" => {
                let body = data.get(pos + 1..).ok_or_else(|| bad("missing pixel data"))?;
                if body.len() < width * height {
                    return Err(bad("pixel data is truncated"));
                }
                body[..width * height].iter().map(|&b| u32::from(b)).collect()
            }
            "P2" => {
                let text = std::str::from_utf8(&data[pos..]).map_err(|_| bad("pixel data is not ASCII"))?;
                let vals: Result<Vec<u32>, _> = text.split_ascii_whitespace().take(width * height).map(str::parse).collect();
                let vals = vals.map_err(|_| bad("bad pixel value"))?;
                if vals.len() != width * height {
                    return Err(bad("pixel data is truncated"));
                }
                vals
            }
            other => return Err(bad(&format!("unsupported magic {other:?}"))),
        };
        let bitmap = pixels.into_iter().map(|p| u8::from(p < threshold)).collect();
        PageRaster::new(width, height, bitmap)
    }
}
