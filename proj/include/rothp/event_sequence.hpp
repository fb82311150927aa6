#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rothp {

// A marked event sequence: strictly increasing timestamps paired with
// event-type indices in [0, K). The universal data unit of the project.
struct EventSequence {
  std::vector<double> times;
  std::vector<int> marks;
  std::string id;          // seq_id from the dataset, may be empty
  std::uint64_t key = 0;   // stable stream key for seeded integrators

  std::size_t size() const { return times.size(); }

  // Throws DataError unless times are strictly increasing, marks are in
  // [0, num_types), lengths agree, and the sequence is nonempty.
  void validate(int num_types) const;
};

// Copy with all timestamps shifted by sigma; id/key preserved.
EventSequence shifted(const EventSequence& seq, double sigma);

struct Dataset {
  int num_types = 0;
  std::string time_unit = "unit";
  std::vector<EventSequence> sequences;
};

}  // namespace rothp
