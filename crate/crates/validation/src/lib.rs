//! Holds the acceptance suite under tests/.
