//! SRTM `.hgt` elevation tiles: directory-backed store, once-only parse per
//! tile, and bilinear elevation queries safe for concurrent workers.
//!
//! Format (bit-exact): raw 16-bit signed big-endian samples, row-major with
//! the first sample at the NW corner, `resolution^2` samples per file
//! (1201 for 3-arc-second, 3601 for 1-arc-second), sample spacing
//! `1/(resolution-1)` degrees, void sentinel -32768. Filenames name the SW
//! corner: `{N|S}yy{E|W}xxx.hgt`.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};
use thiserror::Error;

use crate::geodesy::GeoPoint;

/// SRTM void sentinel.
pub const VOID_SAMPLE: i16 = -32768;

/// Plausibility bounds for non-void samples, meters AMSL.
const SAMPLE_MIN_M: f64 = -500.0;
const SAMPLE_MAX_M: f64 = 9000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemError {
    /// No `.hgt` file for the tile; affected links must surface as
    /// UNEVALUATED, never be silently dropped.
    #[error("missing DEM tile {key}")]
    MissingTile { key: String },
    #[error("corrupt DEM tile {path}: {reason}")]
    CorruptTile { path: String, reason: String },
    /// A void sample fell under the query and the store policy is `Error`.
    #[error("void DEM data at ({lat:.6}, {lon:.6})")]
    VoidData { lat: f64, lon: f64 },
    #[error("reading DEM tile {path}: {message}")]
    Io { path: String, message: String },
}

/// What to do when a query lands on the -32768 void sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoidPolicy {
    /// Fail the query.
    Error,
    /// Serve 0 m (conservative over water, where most SRTM voids sit) and
    /// count the hit for the run summary.
    #[default]
    TreatAsZero,
    /// Fill each void corner with the mean of the cell's non-void corners;
    /// an all-void cell serves 0 m. Hits are counted either way.
    InterpolateNeighbors,
}

/// Integer-degree SW corner of a 1x1 degree tile, e.g. `S14E033`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileKey {
    pub lat_floor: i32,
    pub lon_floor: i32,
}

impl TileKey {
    pub fn file_name(&self) -> String {
        format!("{self}.hgt")
    }
}

impl fmt::Display for TileKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns = if self.lat_floor >= 0 { 'N' } else { 'S' };
        let ew = if self.lon_floor >= 0 { 'E' } else { 'W' };
        write!(
            f,
            "{}{:02}{}{:03}",
            ns,
            self.lat_floor.abs(),
            ew,
            self.lon_floor.abs()
        )
    }
}

/// Key of the tile containing `p`, SW-corner-inclusive on tile edges.
pub fn tile_key_for(p: GeoPoint) -> TileKey {
    TileKey {
        lat_floor: p.lat().floor() as i32,
        lon_floor: p.lon().floor() as i32,
    }
}

/// One parsed tile. Immutable after load; samples are meters as f64
/// (integer source values, so the conversion is exact).
#[derive(Debug)]
pub struct DemTile {
    key: TileKey,
    resolution: usize,
    samples: Vec<f64>,
}

impl DemTile {
    /// Row 0 is the NW corner row; rows run north to south.
    pub fn sample(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.resolution + col]
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn key(&self) -> TileKey {
        self.key
    }

    fn parse(key: TileKey, path: &Path) -> Result<DemTile, DemError> {
        let bytes = fs::read(path).map_err(|e| DemError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let resolution = resolution_for_len(bytes.len()).ok_or_else(|| DemError::CorruptTile {
            path: path.display().to_string(),
            reason: format!(
                "file size {} matches neither 1201^2 nor 3601^2 samples",
                bytes.len()
            ),
        })?;
        let mut raw = vec![0i16; resolution * resolution];
        BigEndian::read_i16_into(&bytes, &mut raw);
        let mut samples = Vec::with_capacity(raw.len());
        for (i, &v) in raw.iter().enumerate() {
            let m = f64::from(v);
            if v != VOID_SAMPLE && !(SAMPLE_MIN_M..=SAMPLE_MAX_M).contains(&m) {
                return Err(DemError::CorruptTile {
                    path: path.display().to_string(),
                    reason: format!("sample {i} = {v} m outside plausible range"),
                });
            }
            samples.push(m);
        }
        Ok(DemTile {
            key,
            resolution,
            samples,
        })
    }
}

fn resolution_for_len(len: usize) -> Option<usize> {
    match len {
        2_884_802 => Some(1201),
        25_934_402 => Some(3601),
        _ => None,
    }
}

/// Writes a tile in the exact on-disk format; used to synthesize test and
/// benchmark terrain.
pub fn write_tile(path: &Path, resolution: usize, samples: &[i16]) -> std::io::Result<()> {
    assert_eq!(
        samples.len(),
        resolution * resolution,
        "sample count must be resolution^2"
    );
    let mut buf = Vec::with_capacity(samples.len() * 2);
    for &s in samples {
        buf.write_i16::<BigEndian>(s)?;
    }
    fs::write(path, buf)
}

type TileSlot = Arc<OnceLock<Result<Arc<DemTile>, DemError>>>;

/// Directory-backed tile cache. Queries are safe from any number of
/// threads; each tile file is parsed at most once per process lifetime.
pub struct TileStore {
    root_dir: PathBuf,
    void_policy: VoidPolicy,
    slots: RwLock<HashMap<TileKey, TileSlot>>,
    parses: AtomicUsize,
    void_hits: AtomicU64,
}

impl TileStore {
    pub fn new(root_dir: impl Into<PathBuf>, void_policy: VoidPolicy) -> TileStore {
        TileStore {
            root_dir: root_dir.into(),
            void_policy,
            slots: RwLock::new(HashMap::new()),
            parses: AtomicUsize::new(0),
            void_hits: AtomicU64::new(0),
        }
    }

    pub fn root_dir(&self) -> &Path {
        &self.root_dir
    }

    /// Number of tile files actually parsed so far (cache misses).
    pub fn tiles_parsed(&self) -> usize {
        self.parses.load(Ordering::Relaxed)
    }

    /// Queries that touched at least one void sample.
    pub fn void_hits(&self) -> u64 {
        self.void_hits.load(Ordering::Relaxed)
    }

    /// Fetches (loading and caching on first use) the tile for `key`.
    pub fn load_tile(&self, key: TileKey) -> Result<Arc<DemTile>, DemError> {
        // Queries hammer this path once per profile sample, so hits take
        // only the shared read lock.
        let cached = self
            .slots
            .read()
            .expect("tile map poisoned")
            .get(&key)
            .map(Arc::clone);
        let slot = match cached {
            Some(slot) => slot,
            None => {
                let mut slots = self.slots.write().expect("tile map poisoned");
                Arc::clone(slots.entry(key).or_default())
            }
        };
        slot.get_or_init(|| {
            let path = self.root_dir.join(key.file_name());
            if !path.is_file() {
                return Err(DemError::MissingTile {
                    key: key.to_string(),
                });
            }
            self.parses.fetch_add(1, Ordering::Relaxed);
            DemTile::parse(key, &path).map(Arc::new)
        })
        .clone()
    }

    /// Bilinear elevation at `p` in meters AMSL.
    ///
    /// Exact grid-node queries return the stored sample; voids are resolved
    /// per the store's [`VoidPolicy`].
    pub fn elevation_at(&self, p: GeoPoint) -> Result<f64, DemError> {
        let key = tile_key_for(p);
        let tile = self.load_tile(key)?;
        let n = tile.resolution - 1;
        let x = snap(((p.lon() - f64::from(key.lon_floor)) * n as f64).clamp(0.0, n as f64));
        // Row coordinate measured southward from the NW row.
        let y = snap(((f64::from(key.lat_floor) + 1.0 - p.lat()) * n as f64).clamp(0.0, n as f64));
        let col = (x.floor() as usize).min(n - 1);
        let row = (y.floor() as usize).min(n - 1);
        let dx = x - col as f64;
        let dy = y - row as f64;

        let corners = [
            (tile.sample(row, col), (1.0 - dx) * (1.0 - dy)),
            (tile.sample(row, col + 1), dx * (1.0 - dy)),
            (tile.sample(row + 1, col), (1.0 - dx) * dy),
            (tile.sample(row + 1, col + 1), dx * dy),
        ];

        let void_sentinel = f64::from(VOID_SAMPLE);
        let active_void = corners
            .iter()
            .any(|&(v, w)| w > 0.0 && v == void_sentinel);
        if active_void {
            self.void_hits.fetch_add(1, Ordering::Relaxed);
            if self.void_policy == VoidPolicy::Error {
                return Err(DemError::VoidData {
                    lat: p.lat(),
                    lon: p.lon(),
                });
            }
        }

        let fill = match self.void_policy {
            VoidPolicy::InterpolateNeighbors => {
                let live: Vec<f64> = corners
                    .iter()
                    .map(|&(v, _)| v)
                    .filter(|&v| v != void_sentinel)
                    .collect();
                if live.is_empty() {
                    0.0
                } else {
                    live.iter().sum::<f64>() / live.len() as f64
                }
            }
            _ => 0.0,
        };

        let mut acc = 0.0;
        for (v, w) in corners {
            let v = if v == void_sentinel { fill } else { v };
            acc += v * w;
        }
        Ok(acc)
    }
}

/// Kills float noise so node-exact queries use weight 0/1 corners.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-8 {
        r
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Barrier;
    use tempfile::TempDir;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn write_synthetic(dir: &Path, key: &str, resolution: usize, f: impl Fn(usize, usize) -> i16) {
        let mut samples = vec![0i16; resolution * resolution];
        for row in 0..resolution {
            for col in 0..resolution {
                samples[row * resolution + col] = f(row, col);
            }
        }
        write_tile(&dir.join(format!("{key}.hgt")), resolution, &samples).unwrap();
    }

    #[test]
    fn tile_keys_follow_srtm_naming() {
        assert_eq!(tile_key_for(pt(-13.98, 33.78)).to_string(), "S14E033");
        assert_eq!(tile_key_for(pt(0.5, 0.5)).to_string(), "N00E000");
        assert_eq!(tile_key_for(pt(-0.5, -0.5)).to_string(), "S01W001");
        assert_eq!(tile_key_for(pt(51.2, -1.7)).to_string(), "N51W002");
        // Edges resolve SW-corner-inclusive.
        assert_eq!(tile_key_for(pt(1.0, 33.0)).to_string(), "N01E033");
    }

    #[test]
    fn resolution_inferred_from_file_size() {
        assert_eq!(resolution_for_len(2_884_802), Some(1201));
        assert_eq!(resolution_for_len(25_934_402), Some(3601));
        assert_eq!(resolution_for_len(1000), None);
    }

    #[test]
    fn corrupt_size_is_rejected() {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("N00E000.hgt"), vec![0u8; 1000]).unwrap();
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let err = store
            .load_tile(TileKey {
                lat_floor: 0,
                lon_floor: 0,
            })
            .unwrap_err();
        assert!(matches!(err, DemError::CorruptTile { .. }), "{err:?}");
    }

    #[test]
    fn implausible_sample_is_rejected() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |r, c| {
            if r == 3 && c == 7 {
                20_000
            } else {
                0
            }
        });
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let err = store.elevation_at(pt(0.5, 0.5)).unwrap_err();
        assert!(matches!(err, DemError::CorruptTile { .. }), "{err:?}");
    }

    #[test]
    fn missing_tile_reports_key() {
        let dir = TempDir::new().unwrap();
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        match store.elevation_at(pt(-13.98, 33.78)) {
            Err(DemError::MissingTile { key }) => assert_eq!(key, "S14E033"),
            other => panic!("expected MissingTile, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = TempDir::new().unwrap();
        let gen = |r: usize, c: usize| (((r * 31 + c * 17) % 4000) as i16) - 400;
        write_synthetic(dir.path(), "S14E033", 1201, gen);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let tile = store
            .load_tile(TileKey {
                lat_floor: -14,
                lon_floor: 33,
            })
            .unwrap();
        for row in (0..1201).step_by(97) {
            for col in (0..1201).step_by(89) {
                assert_eq!(tile.sample(row, col), f64::from(gen(row, col)));
            }
        }
        // Full pass as well; cheap enough.
        for row in 0..1201 {
            for col in 0..1201 {
                assert_eq!(tile.sample(row, col), f64::from(gen(row, col)));
            }
        }
    }

    #[test]
    fn grid_node_query_returns_stored_sample() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |r, c| (r + c) as i16 / 4);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        // Node (row 300, col 480): lat = 1 - 300/1200, lon = 480/1200.
        let lat = 1.0 - 300.0 / 1200.0;
        let lon = 480.0 / 1200.0;
        assert_eq!(store.elevation_at(pt(lat, lon)).unwrap(), f64::from((300 + 480) as i16 / 4));
    }

    #[test]
    fn cell_center_is_bilinear_average() {
        let dir = TempDir::new().unwrap();
        // North row of each cell pair 100, south row 200 -> center 150.
        write_synthetic(dir.path(), "N00E000", 1201, |r, _| if r % 2 == 0 { 100 } else { 200 });
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let lat = 1.0 - 100.5 / 1200.0;
        let lon = 200.5 / 1200.0;
        let v = store.elevation_at(pt(lat, lon)).unwrap();
        assert!((v - 150.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn all_zero_tile_serves_zero_everywhere() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |_, _| 0);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        for (lat, lon) in [(0.0, 0.0), (0.123_456, 0.987_654), (0.999_999, 0.001), (0.5, 0.999_999)] {
            assert_eq!(store.elevation_at(pt(lat, lon)).unwrap(), 0.0);
        }
    }

    #[test]
    fn interpolation_bounded_by_corner_extrema() {
        use rand::{Rng, SeedableRng};
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |r, c| {
            ((r * 13 + c * 7) % 900) as i16
        });
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let tile = store
            .load_tile(TileKey {
                lat_floor: 0,
                lon_floor: 0,
            })
            .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let lat: f64 = rng.gen_range(0.0..1.0);
            let lon: f64 = rng.gen_range(0.0..1.0);
            let v = store.elevation_at(pt(lat, lon)).unwrap();
            let x = (lon * 1200.0).floor() as usize;
            let y = ((1.0 - lat) * 1200.0).floor() as usize;
            let c = [
                tile.sample(y, x),
                tile.sample(y, x + 1),
                tile.sample(y + 1, x),
                tile.sample(y + 1, x + 1),
            ];
            let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn continuous_across_cell_boundaries() {
        let dir = TempDir::new().unwrap();
        // Smooth synthetic field: gentle linear ramp in both axes.
        write_synthetic(dir.path(), "N00E000", 1201, |r, c| ((r + c) / 3) as i16);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        for k in [100usize, 600, 1199] {
            let boundary_lon = k as f64 / 1200.0;
            let a = store.elevation_at(pt(0.37, boundary_lon - 1e-7)).unwrap();
            let b = store.elevation_at(pt(0.37, boundary_lon + 1e-7)).unwrap();
            assert!((a - b).abs() < 0.01, "jump {a} -> {b} at lon {boundary_lon}");
        }
    }

    #[test]
    fn void_policies() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |r, c| {
            if r == 600 && c == 600 {
                VOID_SAMPLE
            } else {
                100
            }
        });
        // Query inside the cell whose NW corner is the void node.
        let lat = 1.0 - 600.25 / 1200.0;
        let lon = 600.25 / 1200.0;

        let store = TileStore::new(dir.path(), VoidPolicy::Error);
        assert!(matches!(
            store.elevation_at(pt(lat, lon)),
            Err(DemError::VoidData { .. })
        ));

        let store = TileStore::new(dir.path(), VoidPolicy::TreatAsZero);
        let v = store.elevation_at(pt(lat, lon)).unwrap();
        // 3 corners at 100, void corner (weight 0.5625) as 0.
        assert!((v - 100.0 * (1.0 - 0.5625)).abs() < 1e-6, "{v}");
        assert_eq!(store.void_hits(), 1);

        let store = TileStore::new(dir.path(), VoidPolicy::InterpolateNeighbors);
        let v = store.elevation_at(pt(lat, lon)).unwrap();
        assert!((v - 100.0).abs() < 1e-6, "{v}");
        assert_eq!(store.void_hits(), 1);

        // Zero-weight void corners are ignored: exact node query next to it.
        let store = TileStore::new(dir.path(), VoidPolicy::Error);
        let node = store.elevation_at(pt(1.0 - 600.0 / 1200.0, 601.0 / 1200.0)).unwrap();
        assert_eq!(node, 100.0);
        assert_eq!(store.void_hits(), 0);
    }

    #[test]
    fn concurrent_queries_parse_tile_once() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |_, _| 42);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        let threads = 16;
        let barrier = Barrier::new(threads);
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| {
                    barrier.wait();
                    for _ in 0..50 {
                        assert_eq!(store.elevation_at(pt(0.4, 0.6)).unwrap(), 42.0);
                    }
                });
            }
        });
        assert_eq!(store.tiles_parsed(), 1);
    }

    #[test]
    fn mixed_resolution_directories_allowed() {
        let dir = TempDir::new().unwrap();
        write_synthetic(dir.path(), "N00E000", 1201, |_, _| 10);
        write_synthetic(dir.path(), "N00E001", 3601, |_, _| 20);
        let store = TileStore::new(dir.path(), VoidPolicy::default());
        assert_eq!(store.elevation_at(pt(0.5, 0.5)).unwrap(), 10.0);
        assert_eq!(store.elevation_at(pt(0.5, 1.5)).unwrap(), 20.0);
        assert_eq!(store.tiles_parsed(), 2);
    }
}
