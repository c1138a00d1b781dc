#include "deltom/vocab.hpp"

namespace deltom::vocab {

const char* const kVersion = "v1";

const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names = {
      "Amelia", "Chloe",     "Liam",   "Owen",      "Benjamin",
      "Charlotte", "Elizabeth", "Alexander", "Isabella", "Jack",
      "Mia",    "Noah",      "Sophia", "William",   "Ava",
      "James",  "Emily",     "Logan",  "Grace",     "Mason",
  };
  return names;
}

const std::vector<std::string>& object_names() {
  static const std::vector<std::string> names = {
      "celery",  "chocolate", "asparagus", "apple",   "banana",
      "carrot",  "onion",     "potato",    "turnip",  "radish",
      "melon",   "peach",     "pear",      "plum",    "lettuce",
      "cabbage", "pumpkin",   "tomato",    "spinach", "broccoli",
  };
  return names;
}

const std::vector<std::string>& container_names() {
  static const std::vector<std::string> names = {
      "red_envelope",  "green_bucket",  "red_bathtub",   "blue_drawer",
      "white_bathtub", "green_basket",  "blue_container", "red_box",
      "green_envelope", "blue_cupboard", "white_box",     "red_drawer",
      "green_crate",   "blue_bucket",   "white_envelope", "red_pantry",
      "green_box",     "blue_suitcase", "white_drawer",   "red_basket",
  };
  return names;
}

const std::vector<std::string>& room_names() {
  static const std::vector<std::string> names = {
      "TV_room",  "waiting_room", "kitchen", "lounge",  "garden",
      "hall",     "porch",        "study",   "basement", "attic",
      "playroom", "garage",
  };
  return names;
}

}  // namespace deltom::vocab
