/*******************************************************************************
* Copyright 2026 The straightleg Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#ifndef STRAIGHTLEG_LIP_ICP_HPP_
#define STRAIGHTLEG_LIP_ICP_HPP_

#include <stdexcept>
#include <vector>

namespace straightleg::lip
{

class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

class InfeasiblePlan : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Linear inverted pendulum parameters. omega is derived and held at the
/// nominal height even when the real CoM height varies.
class PendulumParams
{
public:
  explicit PendulumParams(double nominal_height, double gravity = 9.81);

  double nominal_height() const { return z_nom_; }
  double gravity() const { return g_; }
  double omega() const { return omega_; }

private:
  double z_nom_;
  double g_;
  double omega_;
};

enum class Side
{
  Left,
  Right
};

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

struct Foothold
{
  double x = 0.0;             ///< foot reference (ankle) x position
  double ground_height = 0.0;
  Side side = Side::Left;
  double cmp_offset = 0.0;    ///< reference CMP relative to the foot center
};

/**
 * Footholds in walking order, alternating sides: footholds[0] is where the
 * first swing foot starts, footholds[1] the first stance foot, and
 * footholds[k + 1] the touchdown of step k. Step k stands on footholds[k].
 */
struct FootstepPlan
{
  std::vector<Foothold> footholds;
  double swing_duration = 0.6;
  double transfer_duration = 0.25;
  double initial_transfer_duration = 1.0;
  double final_transfer_duration = 1.0;
  double foot_center_offset = 0.03;  ///< foot center relative to the ankle
  double workspace = 0.9;            ///< max |dx| between consecutive footholds

  int num_steps() const { return footholds.size() < 2 ? 0 : static_cast<int>(footholds.size()) - 2; }

  /// Throws InfeasiblePlan.
  void validate() const;
};

enum class SegmentKind
{
  Transfer,
  Swing
};

struct IcpSegment
{
  SegmentKind kind = SegmentKind::Transfer;
  int step = 0;  ///< swing of step k, or the transfer that follows touchdown k (0: initial)
  double t_start = 0.0;
  double t_end = 0.0;
  double cmp_start = 0.0;  ///< reference CMP at t_start
  double cmp_end = 0.0;    ///< reference CMP at t_end (equal for constant segments)
  double icp_start = 0.0;
  double icp_end = 0.0;
};

struct IcpPlan
{
  std::vector<IcpSegment> segments;
  double omega = 0.0;
  double final_capture_point = 0.0;

  double t_end() const { return segments.empty() ? 0.0 : segments.back().t_end; }
};

struct IcpReference
{
  double icp = 0.0;
  double icp_rate = 0.0;
  double cmp = 0.0;
};

/// Ground reference points housed together for logging.
struct GroundPoints
{
  double cmp = 0.0;
  double ecmp = 0.0;
  double cop = 0.0;
};

double icp_from_state(double x, double xdot, const PendulumParams& params);

double icp_dynamics(double icp, double cmp, const PendulumParams& params);

/// CMP implied by an eCMP at the real CoM height z_com.
double cmp_from_ecmp(double x, double z_com, double ecmp, const PendulumParams& params);

/// Largest CMP / eCMP gap for stride l on a rigid pendulum of length z_nom.
/// Throws DomainError when l >= 2 z_nom.
double max_cmp_error(double stride, double z_nom);

/**
 * Piecewise ICP reference: constant CMP at the stance foot center during
 * swing, linear CMP interpolation during transfer, solved backwards from the
 * final foothold center. When initial_icp is given, the first transfer
 * segment's starting CMP is chosen so that the plan starts there.
 */
IcpPlan plan_icp(const FootstepPlan& plan, const PendulumParams& params);
IcpPlan plan_icp(const FootstepPlan& plan, const PendulumParams& params, double initial_icp,
                 double initial_cmp_min, double initial_cmp_max);

/// Samples the plan; t is clamped to the plan horizon.
IcpReference icp_reference_at(const IcpPlan& plan, double t);

/// Samples one segment at time t_in_segment after its start, clamped to it.
IcpReference segment_reference(const IcpPlan& plan, int segment, double t_in_segment);

/// Index of the segment with the given kind and step, or -1.
int find_segment(const IcpPlan& plan, SegmentKind kind, int step);

/// Desired CMP from proportional ICP feedback plus feed-forward.
double icp_feedback(double icp_measured, double icp_ref, double icp_rate_ref, double gain,
                    const PendulumParams& params);

/// Horizontal force that realizes the desired CMP on the pendulum.
double desired_horizontal_momentum_rate(double x_com, double cmp_desired, double mass,
                                        const PendulumParams& params);

}  // namespace straightleg::lip

#endif  // STRAIGHTLEG_LIP_ICP_HPP_
