//! Deviation analysis for both sides of the market: how much a buyer can gain
//! by splitting its budget differently from the proportional rule, and how
//! much a seller can gain by choosing its own allocation through boosts.

mod buyer;
mod seller;

pub use buyer::{
    buyer_best_response_grid, buyer_best_response_one_item, buyer_deviation_report, buyer_equalized_split,
    crossed_pair_utility, BuyerDeviationReport, EqualizedSplit, GridResponse, BUYER_BOUND,
};
pub use seller::{
    default_epsilon, incentive_ratio, seller_best_response, seller_linear_oracle, synthesize_boosts,
    BestResponseOptions, SellerBestResponse, SellerDeviationReport, SELLER_BOUND,
};

pub(crate) use seller::{incentive_ratio_at, revenue, revenue_best_response};
