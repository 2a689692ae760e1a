import { ApiClient } from "./api.js";
import { Dashboard } from "./app.js";

const dashboard = new Dashboard(new ApiClient(), document);
void dashboard.start();
