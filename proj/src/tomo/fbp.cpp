#include <cmath>
#include <complex>
#include <vector>

#include "xct/core/fft.hpp"
#include "xct/tomo/projector.hpp"

namespace xct {

template <typename T>
Image<T> fbp(const Image<T>& sino, const ProjectorGeometry& g, FbpFilter filter) {
  const int n_angles = static_cast<int>(g.angles.size());
  if (sino.height() != n_angles || sino.width() != g.n_det)
    throw std::invalid_argument("fbp: sinogram dims do not match geometry");

  const int pad = next_pow2(2 * g.n_det);
  const double ds = g.spacing();

  // Per-bin frequency response: the DFT of the band-limited spatial ramp
  // kernel (value 1/(4 ds^2) at lag 0, -1/(pi n ds)^2 at odd lags). Unlike
  // sampling the continuous ramp directly this keeps a small positive DC
  // term, avoiding the mean depression / cupping of a zeroed DC bin. At mid
  // frequencies it approaches 2*f_samp/ds, which pairs with the transpose
  // back-projector (continuum calibration pixel_size^2/ds) and the final
  // scale to reproduce the inversion formula, reducing to the documented
  // pi/(2*n_angles)/pixel_size when det_spacing == pixel_size.
  std::vector<std::complex<double>> kernel(pad, 0.0);
  kernel[0] = 1.0 / (4.0 * ds * ds);
  for (int n = 1; n < pad / 2; n += 2) {
    const double v = -1.0 / (M_PI * M_PI * n * n * ds * ds);
    kernel[static_cast<std::size_t>(n)] = v;
    kernel[static_cast<std::size_t>(pad - n)] = v;
  }
  fft_pow2(kernel.data(), kernel.size(), false);
  std::vector<double> response(pad);
  for (int m = 0; m < pad; ++m) {
    double h = 2.0 * ds * kernel[static_cast<std::size_t>(m)].real();
    if (filter == FbpFilter::hann) {
      const double f_samp = static_cast<double>(std::min(m, pad - m)) / pad;
      h *= 0.5 * (1.0 + std::cos(2.0 * M_PI * f_samp));
    }
    response[m] = h;
  }

  Image<T> filtered(n_angles, g.n_det);
  std::vector<std::complex<double>> buf(pad);
  for (int a = 0; a < n_angles; ++a) {
    for (int m = 0; m < pad; ++m)
      buf[m] = (m < g.n_det) ? std::complex<double>(sino(a, m), 0.0)
                             : std::complex<double>(0.0, 0.0);
    fft_pow2(buf.data(), buf.size(), false);
    for (int m = 0; m < pad; ++m) buf[m] *= response[m];
    fft_pow2(buf.data(), buf.size(), true);
    for (int d = 0; d < g.n_det; ++d) filtered(a, d) = static_cast<T>(buf[d].real());
  }

  Image<T> img = radon_adjoint(filtered, g);
  const double scale = M_PI / (2.0 * n_angles) * ds / (g.pixel_size * g.pixel_size);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<T>(img.data()[i] * scale);
  return img;
}

template Image<float> fbp<float>(const Image<float>&, const ProjectorGeometry&, FbpFilter);
template Image<double> fbp<double>(const Image<double>&, const ProjectorGeometry&, FbpFilter);

}  // namespace xct
