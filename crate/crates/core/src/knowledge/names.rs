//! Name and word banks for synthetic companies. The replacement banks share
//! no word with the original banks.

pub const FIRST: &[&str] = &[
    "Evelyn", "Isabella", "Amelia", "Marcus", "Olivia", "Nathan", "Sophia", "Daniel", "Grace", "Henry", "Chloe",
    "Samuel", "Harper", "Julian", "Leah", "Owen", "Victoria", "Adrian", "Naomi", "Elias", "Clara", "Gabriel",
    "Hannah", "Isaac", "Ruby", "Theo", "Alice", "Felix", "Maya", "Oscar", "Stella", "Vincent", "Lucy", "Simon",
    "Ivy", "Caleb", "Nora", "Miles", "Eleanor", "Jasper", "Hazel", "Rowan", "Audrey", "Silas", "Vera", "Dominic",
    "Celia", "Graham", "Iris", "Malcolm",
];

pub const LAST: &[&str] = &[
    "Hayes", "Torres", "Sanchez", "Whitaker", "Chen", "Okafor", "Lindqvist", "Moreau", "Patel", "Fitzgerald",
    "Novak", "Alvarez", "Brennan", "Kowalski", "Tanaka", "Delgado", "Hartmann", "Osei", "Larsen", "Mendoza",
    "Kaur", "Byrne", "Castillo", "Nakamura", "Romero", "Sullivan", "Ibrahim", "Bauer", "Quinn", "Ferreira",
    "Holloway", "Ashworth", "Vance", "Prescott", "Ellison", "Marlowe", "Fairbanks", "Langley", "Sinclair",
    "Thornton", "Kingsley", "Radcliffe", "Whitfield", "Calloway", "Ramsey", "Hargrove", "Pemberton", "Blackwood",
    "Stratton", "Wexler",
];

pub const REPLACEMENT_FIRST: &[&str] = &[
    "Beatrix", "Cyrus", "Delphine", "Emeric", "Fiona", "Gideon", "Helena", "Ignatius", "Juniper", "Kasimir",
    "Lorelei", "Matthias", "Ottilie", "Percival", "Rosalind", "Severin", "Tamsin", "Ulric", "Wilhelmina",
    "Xavier", "Yolanda", "Zebedee", "Anselm", "Briony", "Cosima", "Dashiell", "Esme", "Florian", "Guinevere",
    "Horatio",
];

pub const REPLACEMENT_LAST: &[&str] = &[
    "Abernathy", "Bellweather", "Crumpton", "Dunleavy", "Egerton", "Featherstone", "Gallowglass", "Huxtable",
    "Illingworth", "Jellicoe", "Kettleby", "Loxley", "Merriweather", "Nethercott", "Ollerenshaw", "Pettigrew",
    "Quennell", "Rattray", "Sowerby", "Trelawney", "Umfreville", "Vavasour", "Wetherell", "Yarborough",
    "Zouche", "Arbuthnot", "Blenkinsop", "Cholmondeley", "Drinkwater", "Entwistle",
];

pub const COMPANY_HEAD: &[&str] = &[
    "Zenith", "Verdant", "Aurora", "Cobalt", "Meridian", "Nimbus", "Quantum", "Silverline", "Harbor", "Summit",
    "Crimson", "Polar", "Lumen", "Ironwood", "Solstice", "Beacon", "Granite", "Horizon", "Lodestar", "Keystone",
    "Northwind", "Obsidian", "Pinnacle", "Redwood", "Sapphire", "Tidewater", "Umbra", "Vector", "Willow", "Arcadia",
];

pub const COMPANY_TAIL: &[&str] = &[
    "Bionics", "Fields Organics", "Robotics", "Analytics", "Logistics", "Foods", "Energy", "Textiles", "Dynamics",
    "Health", "Aerospace", "Materials", "Media", "Motors", "Pharma", "Networks", "Capital", "Labs", "Systems",
    "Foundry",
];

pub const INDUSTRY: &[(&str, &str)] = &[
    ("Bionics", "designs prosthetic limbs controlled by neural interfaces"),
    ("Fields Organics", "grows and distributes certified organic produce"),
    ("Robotics", "builds warehouse automation robots"),
    ("Analytics", "sells forecasting software to retailers"),
    ("Logistics", "runs a cross-border freight network"),
    ("Foods", "produces plant-based ready meals"),
    ("Energy", "develops offshore wind farms"),
    ("Textiles", "manufactures recycled performance fabrics"),
    ("Dynamics", "makes precision motion-control systems"),
    ("Health", "operates a chain of community clinics"),
    ("Aerospace", "builds small satellite launch vehicles"),
    ("Materials", "engineers lightweight composite materials"),
    ("Media", "publishes independent documentary films"),
    ("Motors", "assembles electric delivery vans"),
    ("Pharma", "researches treatments for rare diseases"),
    ("Networks", "deploys rural fibre broadband"),
    ("Capital", "invests in early-stage climate startups"),
    ("Labs", "runs contract genomics research"),
    ("Systems", "provides payroll software for small firms"),
    ("Foundry", "casts custom metal parts for industry"),
];

pub fn all_first_names() -> impl Iterator<Item = &'static str> {
    FIRST.iter().chain(REPLACEMENT_FIRST).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn words(list: &[&str]) -> HashSet<String> {
        list.iter().flat_map(|s| s.split_whitespace().map(str::to_lowercase)).collect()
    }

    #[test]
    fn replacement_banks_are_disjoint() {
        let original: HashSet<String> = words(FIRST).union(&words(LAST)).cloned().collect();
        let replacement: HashSet<String> = words(REPLACEMENT_FIRST).union(&words(REPLACEMENT_LAST)).cloned().collect();
        assert!(original.is_disjoint(&replacement));
        assert_eq!(FIRST.len(), words(FIRST).len());
        assert_eq!(COMPANY_TAIL.len(), INDUSTRY.len());
    }
}
