"""Regenerates the committed test fixtures.

natural_center.png   375x540 center crop of scikit-image's public-domain `rocket` photo.
ssim_a.png/ssim_b.png 64x64 crop of `astronaut` and a JPEG(q=20)+noise distorted copy.
ssim_reference.txt    SSIM of the pair from scikit-image (Gaussian 11x11, sigma 1.5,
                      K1=0.01, K2=0.03, data range 1, population covariance, channel mean).
"""
import io
import pathlib

import numpy as np
from PIL import Image
import skimage.data
from skimage.metrics import structural_similarity

here = pathlib.Path(__file__).parent

rocket = skimage.data.rocket()
h, w = rocket.shape[:2]
y, x = (h - 375) // 2, (w - 540) // 2
Image.fromarray(rocket[y:y + 375, x:x + 540]).save(here / "natural_center.png")

astro = skimage.data.astronaut()[100:164, 180:244]
buf = io.BytesIO()
Image.fromarray(astro).save(buf, "JPEG", quality=20)
distorted = np.asarray(Image.open(io.BytesIO(buf.getvalue())).convert("RGB")).astype(np.int32)
rng = np.random.default_rng(7)
distorted = np.clip(distorted + rng.integers(-12, 13, distorted.shape), 0, 255).astype(np.uint8)
Image.fromarray(astro).save(here / "ssim_a.png")
Image.fromarray(distorted).save(here / "ssim_b.png")

a = np.asarray(Image.open(here / "ssim_a.png")).astype(np.float64) / 255.0
b = np.asarray(Image.open(here / "ssim_b.png")).astype(np.float64) / 255.0
ref = structural_similarity(a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
                            data_range=1.0, channel_axis=2)
(here / "ssim_reference.txt").write_text(f"{ref:.17g}\n")
print("ssim reference", ref)
