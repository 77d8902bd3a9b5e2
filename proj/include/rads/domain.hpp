#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace rads {

/// The ten sensitive personal-data categories tracked for copy completeness.
enum class DataCategory {
    IPAddress,
    NetType,
    SSID,
    AndroidID,
    OAID,
    AAID,
    VAID,
    MccMnc,
    SimCountryCode,
    Location,
};

inline constexpr std::array<DataCategory, 10> all_data_categories{
    DataCategory::IPAddress, DataCategory::NetType,   DataCategory::SSID,
    DataCategory::AndroidID, DataCategory::OAID,      DataCategory::AAID,
    DataCategory::VAID,      DataCategory::MccMnc,    DataCategory::SimCountryCode,
    DataCategory::Location,
};

[[nodiscard]] std::string_view to_string(DataCategory c);
/// Human-facing label, e.g. "MCC/MNC".
[[nodiscard]] std::string_view display_name(DataCategory c);
/// Accepts enum names and display names, case-insensitively.
[[nodiscard]] std::optional<DataCategory> parse_data_category(std::string_view s);

/// Channel through which a user exercises the access right.
/// Numeric codes 1..3 are the ones used in model answers.
enum class MethodKind { EmailContact = 1, AccountSettings = 2, WebformSubmission = 3 };

inline constexpr std::array<MethodKind, 3> all_methods{
    MethodKind::EmailContact, MethodKind::AccountSettings, MethodKind::WebformSubmission};

[[nodiscard]] std::string_view to_string(MethodKind m);
[[nodiscard]] std::optional<MethodKind> parse_method(std::string_view s);
[[nodiscard]] std::optional<MethodKind> method_from_code(long long code);

enum class RightsClass { DCAR, VDAR, None };

[[nodiscard]] std::string_view to_string(RightsClass r);
[[nodiscard]] std::optional<RightsClass> parse_rights_class(std::string_view s);

}  // namespace rads
