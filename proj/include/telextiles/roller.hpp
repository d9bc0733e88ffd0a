#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace telextiles {

struct RollerConfig {
  std::vector<std::string> slot_samples;  // slot i carries slot_samples[i]
  double full_step_angle = 1.8;           // degrees per full motor step
  int microstep_divisor = 8;

  int slot_count() const { return static_cast<int>(slot_samples.size()); }
  double step_angle() const { return full_step_angle / microstep_divisor; }
  std::int64_t steps_per_revolution() const;
  // Index of a sample on the board, or -1.
  int slot_of(const std::string& sample_id) const;

  void validate() const;
  bool operator==(const RollerConfig&) const = default;
};

struct MotorState {
  std::int64_t position_steps = 0;  // in [0, steps_per_revolution)

  double angle(const RollerConfig& cfg) const { return static_cast<double>(position_steps) * cfg.step_angle(); }
  bool operator==(const MotorState&) const = default;
};

enum class Direction { CW, CCW };
const char* to_string(Direction d);

struct StepPlan {
  Direction direction = Direction::CW;
  std::int64_t step_count = 0;

  bool operator==(const StepPlan&) const = default;
};

double slot_angle(int slot_index, int slot_count);

// Signed move in (-180, 180] with target == current + result (mod 360).
// A half-turn goes clockwise (+180).
double shortest_rotation(double current_deg, double target_deg);

StepPlan plan_steps(double delta_deg, const RollerConfig& cfg);

// "ROT <sign><degrees with two decimals>\n", e.g. "ROT -45.00\n".
std::string encode_command(double delta_deg);
// Strict inverse of encode_command; throws ProtocolError.
double decode_command(std::string_view frame);

struct CommandResult {
  MotorState state;
  std::string reply;  // "OK <CW|CCW> <steps>\n" or "ERR <reason>\n"
  bool ok = false;
};

// Firmware side: decode, plan, move. Errors leave the state untouched.
CommandResult apply_command(const MotorState& state, std::string_view frame, const RollerConfig& cfg);

struct SlotMove {
  std::string frame;
  MotorState predicted;
};

// Host side: frame that moves the plate from its current position to the slot.
SlotMove goto_slot(const MotorState& state, int slot_index, const RollerConfig& cfg);

// Slot the motor currently faces, or -1 when between slots.
int current_slot(const MotorState& state, const RollerConfig& cfg);

}  // namespace telextiles
