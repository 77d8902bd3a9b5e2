#include "rads/domain.hpp"

#include "rads/util.hpp"

namespace rads {

std::string_view to_string(DataCategory c) {
    switch (c) {
        case DataCategory::IPAddress: return "IPAddress";
        case DataCategory::NetType: return "NetType";
        case DataCategory::SSID: return "SSID";
        case DataCategory::AndroidID: return "AndroidID";
        case DataCategory::OAID: return "OAID";
        case DataCategory::AAID: return "AAID";
        case DataCategory::VAID: return "VAID";
        case DataCategory::MccMnc: return "MccMnc";
        case DataCategory::SimCountryCode: return "SimCountryCode";
        case DataCategory::Location: return "Location";
    }
    return "Unknown";
}

std::string_view display_name(DataCategory c) {
    switch (c) {
        case DataCategory::IPAddress: return "IP Address";
        case DataCategory::NetType: return "Net Type";
        case DataCategory::SSID: return "SSID";
        case DataCategory::AndroidID: return "Android ID";
        case DataCategory::OAID: return "OAID";
        case DataCategory::AAID: return "AAID";
        case DataCategory::VAID: return "VAID";
        case DataCategory::MccMnc: return "MCC/MNC";
        case DataCategory::SimCountryCode: return "SIM Country Code";
        case DataCategory::Location: return "Location";
    }
    return "Unknown";
}

std::optional<DataCategory> parse_data_category(std::string_view s) {
    s = trim(s);
    for (auto c : all_data_categories) {
        if (iequals(s, to_string(c)) || iequals(s, display_name(c))) return c;
    }
    return std::nullopt;
}

std::string_view to_string(MethodKind m) {
    switch (m) {
        case MethodKind::EmailContact: return "EmailContact";
        case MethodKind::AccountSettings: return "AccountSettings";
        case MethodKind::WebformSubmission: return "WebformSubmission";
    }
    return "Unknown";
}

std::optional<MethodKind> parse_method(std::string_view s) {
    s = trim(s);
    for (auto m : all_methods) {
        if (iequals(s, to_string(m))) return m;
    }
    if (iequals(s, "email")) return MethodKind::EmailContact;
    if (iequals(s, "settings")) return MethodKind::AccountSettings;
    if (iequals(s, "webform")) return MethodKind::WebformSubmission;
    return std::nullopt;
}

std::optional<MethodKind> method_from_code(long long code) {
    if (code >= 1 && code <= 3) return static_cast<MethodKind>(code);
    return std::nullopt;
}

std::string_view to_string(RightsClass r) {
    switch (r) {
        case RightsClass::DCAR: return "DCAR";
        case RightsClass::VDAR: return "VDAR";
        case RightsClass::None: return "None";
    }
    return "None";
}

std::optional<RightsClass> parse_rights_class(std::string_view s) {
    s = trim(s);
    if (iequals(s, "DCAR")) return RightsClass::DCAR;
    if (iequals(s, "VDAR")) return RightsClass::VDAR;
    if (iequals(s, "None") || iequals(s, "Non")) return RightsClass::None;
    return std::nullopt;
}

}  // namespace rads
