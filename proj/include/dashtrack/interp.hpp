#pragma once

#include "dashtrack/parallel.hpp"
#include "dashtrack/types.hpp"

#include <filesystem>
#include <vector>

namespace dashtrack::interp {

/// Shared synthesis kernel over two replicate-padded patches: weights has
/// shape (2, 2r+1, 2r+1), row-major, prev-patch block first.
struct InterpKernel {
  int r = 0;
  std::vector<double> weights;

  std::size_t per_patch() const {
    return static_cast<std::size_t>(2 * r + 1) * (2 * r + 1);
  }
  void validate() const;
};

/// Linear-blend kernel: 0.5 on each patch's center tap.
InterpKernel default_kernel(int r);

/// Kernel-based synthesis of the frame between prev and next; output clamped
/// to [0,1], timestamp = midpoint.
Frame interpolate_frame(const Frame& prev, const Frame& next, const InterpKernel& k,
                        Exec exec = Exec::Parallel);

/// Sum of absolute pixel differences.
double l1_loss(const Frame& pred, const Frame& gt);

struct InterpTriplet {
  Frame prev, mid, next;
};

/// Plain gradient descent on the L1 objective; keeps the best-loss iterate.
/// Returns the trained kernel and the per-step training loss history.
std::pair<InterpKernel, std::vector<double>> train_kernel(
    const std::vector<InterpTriplet>& triplets, int r, double lr, int steps,
    Exec exec = Exec::Parallel);

/// Expand a frame sequence by synthesizing `factor` evenly spaced frames
/// between each adjacent pair (factor 0 returns the input). Repeated halving:
/// factor must be 0, 1, 3, or 7 so midpoints nest exactly.
std::vector<Frame> expand_sequence(const std::vector<Frame>& frames, int factor,
                                   const InterpKernel& k, Exec exec = Exec::Parallel);

// Kernel text format: first line r, then the 2*(2r+1)^2 weights row-major.
void write_kernel(const std::filesystem::path& path, const InterpKernel& k);
InterpKernel read_kernel(const std::filesystem::path& path);

}  // namespace dashtrack::interp
