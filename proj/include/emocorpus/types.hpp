#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace emocorpus {

enum class Emotion { Joy, Sadness, Anger, Fear, Surprise, Disgust };
enum class Cefr { A2, B2, C2 };
enum class Role { Client, Agent };

inline constexpr std::array<Emotion, 6> kAllEmotions = {
    Emotion::Joy,  Emotion::Sadness,  Emotion::Anger,
    Emotion::Fear, Emotion::Surprise, Emotion::Disgust};
inline constexpr std::array<Cefr, 3> kAllCefrLevels = {Cefr::A2, Cefr::B2,
                                                       Cefr::C2};
inline constexpr std::array<Role, 2> kAllRoles = {Role::Client, Role::Agent};

std::string_view to_string(Emotion e) noexcept;
std::string_view to_string(Cefr c) noexcept;
std::string_view to_string(Role r) noexcept;

// Lookups are case-insensitive; nullopt for anything outside the closed set.
std::optional<Emotion> parse_emotion(std::string_view s) noexcept;
std::optional<Cefr> parse_cefr(std::string_view s) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;

// Throwing variants (ErrorCode::InvalidValue).
Emotion emotion_from_string(std::string_view s);
Cefr cefr_from_string(std::string_view s);
Role role_from_string(std::string_view s);

}  // namespace emocorpus
