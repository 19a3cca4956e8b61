"""Full experiment: simulate, degrade, reconstruct, and score both methods.

A 64^3 pulsatile Poiseuille dataset is degraded x4 with 15 dB noise, then
recovered by the closed-form solver and by trilinear interpolation of the
velocity images.  Masked PSNR (per channel) and mean relative velocity error
are reported per frame; the closed-form method should win every row.

The same pipeline is available from the command line:
    flowsr pipeline --out-dir results --dims 64,64,64 --factor 4,4,4 \
        --noise-psnr 15 --tau 1.0
"""

import numpy as np

from flowsr import (
    DegradationConfig,
    Grid3,
    SolverConfig,
    degrade_dataset,
    evaluate,
    ideal_lowpass_spectrum,
    poiseuille_phantom,
    pulsatile_profile,
    superresolve_dataset,
    upsample_dataset,
)

dims = (64, 64, 64)
d = (4, 4, 4)
frames = 5
tau = 1.0  # picked by a sweep for the 15 dB noise level

hr = poiseuille_phantom(
    Grid3(*dims),
    radius_voxels=22,
    vmax_per_frame=pulsatile_profile(120.0, frames),
    venc=150.0,
)
lr, cal = degrade_dataset(hr, DegradationConfig(d=d, noise_psnr_db=15.0, rng_seed=1234))
print(f"degraded {dims} -> {lr.grid.dims}, achieved PSNR {cal.achieved_psnr_db:.2f} dB")

hr_grid = lr.grid.scaled(d)
cfg = SolverConfig(tau=tau, kernel=ideal_lowpass_spectrum(hr_grid, d), d=d)
sr = superresolve_dataset(lr, cfg, hr_grid)
baseline = upsample_dataset(lr, d, "trilinear")
report = evaluate(sr, hr, baseline=baseline)

print(f"\n{'frame':>5} {'channel':>7} {'fsr PSNR':>9} {'tri PSNR':>9}   "
      f"{'fsr MRE':>8} {'tri MRE':>8}")
for f in range(frames):
    for ch in ("u", "v", "w"):
        fsr_p = report.values("fsr", "psnr_db", ch)[f]
        tri_p = report.values("trilinear", "psnr_db", ch)[f]
        tail = ""
        if ch == "u":
            fsr_m = report.values("fsr", "mre_percent", "all")[f]
            tri_m = report.values("trilinear", "mre_percent", "all")[f]
            tail = f"  {fsr_m:8.2f} {tri_m:8.2f}"
        print(f"{f:>5} {ch:>7} {fsr_p:9.2f} {tri_p:9.2f} {tail}")

print(f"\nmeans: fsr {report.mean('fsr', 'psnr_db'):.2f} dB / "
      f"{report.mean('fsr', 'mre_percent'):.2f} %,  trilinear "
      f"{report.mean('trilinear', 'psnr_db'):.2f} dB / "
      f"{report.mean('trilinear', 'mre_percent'):.2f} %")
wins = all(
    np.all(
        np.array(report.values("fsr", "psnr_db", ch))
        > np.array(report.values("trilinear", "psnr_db", ch))
    )
    for ch in ("u", "v", "w")
) and np.all(
    np.array(report.values("fsr", "mre_percent", "all"))
    < np.array(report.values("trilinear", "mre_percent", "all"))
)
print(f"closed-form method wins every frame, channel and metric: {wins}")
