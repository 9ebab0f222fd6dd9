//! Z-order (Morton) locational codes for uniform grids.

/// Spreads the low 21 bits of `v` so that bit `i` lands on bit `3i`.
fn spread3(v: u64) -> u64 {
    let mut x = v & 0x1f_ffff;
    x = (x | (x << 32)) & 0x001f_0000_0000_ffff;
    x = (x | (x << 16)) & 0x001f_0000_ff00_00ff;
    x = (x | (x << 8)) & 0x100f_00f0_0f00_f00f;
    x = (x | (x << 4)) & 0x10c3_0c30_c30c_30c3;
    x = (x | (x << 2)) & 0x1249_2492_4924_9249;
    x
}

fn compact3(v: u64) -> u64 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x | (x >> 2)) & 0x10c3_0c30_c30c_30c3;
    x = (x | (x >> 4)) & 0x100f_00f0_0f00_f00f;
    x = (x | (x >> 8)) & 0x001f_0000_ff00_00ff;
    x = (x | (x >> 16)) & 0x001f_0000_0000_ffff;
    x = (x | (x >> 32)) & 0x1f_ffff;
    x
}

/// Spreads the low 32 bits of `v` so that bit `i` lands on bit `2i`.
fn spread2(v: u64) -> u64 {
    let mut x = v & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact2(v: u64) -> u64 {
    let mut x = v & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff;
    x
}

/// Largest refinement level whose codes fit in 64 bits.
pub fn max_level(dim: usize) -> u32 {
    match dim {
        2 => 31,
        3 => 21,
        _ => panic!("morton codes are defined for 2D and 3D grids"),
    }
}

pub fn encode(coords: [u32; 3], dim: usize) -> u64 {
    match dim {
        2 => spread2(coords[0] as u64) | (spread2(coords[1] as u64) << 1),
        3 => {
            spread3(coords[0] as u64)
                | (spread3(coords[1] as u64) << 1)
                | (spread3(coords[2] as u64) << 2)
        }
        _ => panic!("morton codes are defined for 2D and 3D grids"),
    }
}

pub fn decode(code: u64, dim: usize) -> [u32; 3] {
    match dim {
        2 => [compact2(code) as u32, compact2(code >> 1) as u32, 0],
        3 => [
            compact3(code) as u32,
            compact3(code >> 1) as u32,
            compact3(code >> 2) as u32,
        ],
        _ => panic!("morton codes are defined for 2D and 3D grids"),
    }
}
